"""KDD'99 record parsing, categorical encoding, grouping and normalization.

A raw line is 41 comma-separated features plus a label (which conventionally
carries a trailing period).  Features 1..3 (protocol, service, flag) are
text; the rest are numeric.  Protocols get the fixed 3-bit codes
tcp=001, icmp=010, udp=011; service and flag map to integer indices by
frequency rank in the training data.  All encoded columns are min-max
scaled to [0, 1] with bounds fitted on training data only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    FieldCountError,
    NumericParseError,
    UnknownCategoryError,
    UnknownLabelError,
)

N_FEATURES = 3 + 38          # three categorical + 38 numeric raw features
N_FIELDS = N_FEATURES + 1    # plus the label
PROTOCOL_POS = 1             # 0-based positions of the categorical features
SERVICE_POS = 2
FLAG_POS = 3
PROTOCOL_BITS = 3
ENCODED_WIDTH = N_FEATURES - 3 + PROTOCOL_BITS + 2   # 43 columns

# Fixed 3-bit protocol codes (most significant bit first).
PROTOCOL_CODES: dict[str, tuple[int, int, int]] = {
    "tcp": (0, 0, 1),
    "icmp": (0, 1, 0),
    "udp": (0, 1, 1),
}


class AttackClass(enum.Enum):
    NORMAL = "normal"
    DOS = "dos"
    PROBE = "probe"
    R2L = "r2l"
    U2R = "u2r"


# Seeded from the published table of example attacks per group (training and
# test set columns merged).  "bufferoverflow" is how the table spells the
# dataset's "buffer_overflow"; both are kept.
SEED_ATTACK_GROUPS: dict[str, AttackClass] = {
    "normal": AttackClass.NORMAL,
    # DoS
    "neptune": AttackClass.DOS,
    "teardrop": AttackClass.DOS,
    "processtable": AttackClass.DOS,
    "mailbomb": AttackClass.DOS,
    # Probe
    "portsweep": AttackClass.PROBE,
    "ipsweep": AttackClass.PROBE,
    "saint": AttackClass.PROBE,
    "mscan": AttackClass.PROBE,
    # R2L
    "spy": AttackClass.R2L,
    "multihop": AttackClass.R2L,
    "named": AttackClass.R2L,
    "xsnoop": AttackClass.R2L,
    # U2R
    "bufferoverflow": AttackClass.U2R,
    "buffer_overflow": AttackClass.U2R,
    "perl": AttackClass.U2R,
    "ps": AttackClass.U2R,
    "xterm": AttackClass.U2R,
}

# Extension map for the remaining labels of the public KDD'99 task
# description (1999 training attacks plus the extra test-only attacks).
EXTENSION_ATTACK_GROUPS: dict[str, AttackClass] = {
    # DoS
    "back": AttackClass.DOS,
    "land": AttackClass.DOS,
    "pod": AttackClass.DOS,
    "smurf": AttackClass.DOS,
    "apache2": AttackClass.DOS,
    "udpstorm": AttackClass.DOS,
    # Probe
    "nmap": AttackClass.PROBE,
    "satan": AttackClass.PROBE,
    # R2L
    "ftp_write": AttackClass.R2L,
    "guess_passwd": AttackClass.R2L,
    "imap": AttackClass.R2L,
    "phf": AttackClass.R2L,
    "warezclient": AttackClass.R2L,
    "warezmaster": AttackClass.R2L,
    "sendmail": AttackClass.R2L,
    "snmpgetattack": AttackClass.R2L,
    "snmpguess": AttackClass.R2L,
    "worm": AttackClass.R2L,
    "xlock": AttackClass.R2L,
    # U2R
    "loadmodule": AttackClass.U2R,
    "rootkit": AttackClass.U2R,
    "httptunnel": AttackClass.U2R,
    "sqlattack": AttackClass.U2R,
}

DEFAULT_ATTACK_GROUPS: dict[str, AttackClass] = {
    **SEED_ATTACK_GROUPS,
    **EXTENSION_ATTACK_GROUPS,
}


@dataclass
class ConnectionRecord:
    """One parsed connection: 3 categorical values, 38 numeric features, label."""

    protocol: str
    service: str
    flag: str
    numeric: np.ndarray          # 38 floats, original order (duration first)
    label: str

    def __post_init__(self):
        if len(self.numeric) != 38:
            raise FieldCountError(f"expected 38 numeric features, got {len(self.numeric)}")
        if not self.label:
            raise FieldCountError("empty label")


def parse_record(line: str) -> ConnectionRecord:
    """Parse one comma-separated KDD line into a ConnectionRecord.

    Raises FieldCountError when the line has != 42 fields and
    NumericParseError when a numeric position holds non-numeric text.
    """
    fields = line.strip().split(",")
    if len(fields) != N_FIELDS:
        raise FieldCountError(f"expected {N_FIELDS} fields, got {len(fields)}")
    label = fields[-1].strip()
    if label.endswith("."):
        label = label[:-1]
    if not label:
        raise FieldCountError("empty label")
    numeric = np.empty(38, dtype=float)
    j = 0
    for i, raw in enumerate(fields[:-1]):
        if i in (PROTOCOL_POS, SERVICE_POS, FLAG_POS):
            continue
        try:
            numeric[j] = float(raw)
        except ValueError:
            raise NumericParseError(f"field {i}: {raw!r} is not numeric") from None
        j += 1
    return ConnectionRecord(
        protocol=fields[PROTOCOL_POS].strip(),
        service=fields[SERVICE_POS].strip(),
        flag=fields[FLAG_POS].strip(),
        numeric=numeric,
        label=label,
    )


@dataclass
class EncodingTable:
    """Categorical-value -> numeric-code maps fitted on training records."""

    protocol_codes: dict[str, tuple[int, ...]]
    service_index: dict[str, int]
    flag_index: dict[str, int]

    def decode_protocol(self, bits: tuple[int, ...]) -> str:
        for name, code in self.protocol_codes.items():
            if code == tuple(int(b) for b in bits):
                return name
        raise UnknownCategoryError(f"no protocol has code {bits}")


def _frequency_index(values: list[str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    # most frequent first; ties broken alphabetically for determinism
    ranked = sorted(counts, key=lambda v: (-counts[v], v))
    return {v: i for i, v in enumerate(ranked)}


def fit_encoding(records: list[ConnectionRecord]) -> EncodingTable:
    """Build the encoding table from training records.

    The three known protocols keep their fixed codes; any additional protocol
    value gets the next 3-bit code in frequency order.
    """
    protocol_codes = dict(PROTOCOL_CODES)
    extra = sorted(
        {r.protocol for r in records} - set(protocol_codes),
        key=lambda p: (-sum(r.protocol == p for r in records), p),
    )
    next_code = 4
    for p in extra:
        if next_code >= 2 ** PROTOCOL_BITS:
            raise UnknownCategoryError("more than 7 distinct protocols")
        protocol_codes[p] = tuple(int(b) for b in format(next_code, "03b"))
        next_code += 1
    return EncodingTable(
        protocol_codes=protocol_codes,
        service_index=_frequency_index([r.service for r in records]),
        flag_index=_frequency_index([r.flag for r in records]),
    )


def encode(
    record: ConnectionRecord, table: EncodingTable, lenient: bool = False
) -> np.ndarray:
    """Encode one record into the 43-column feature vector.

    Layout: duration, protocol bits (3, MSB first), service index, flag
    index, then the remaining 37 numeric features in file order.  In
    lenient mode a service/flag value unseen at fit time maps to the
    next index past the table (an "unseen" bucket, clamped to 1 by the
    normalizer); unknown protocols are an error in both modes.
    """
    if record.protocol not in table.protocol_codes:
        raise UnknownCategoryError(f"protocol {record.protocol!r} not in table")
    if not lenient:
        if record.service not in table.service_index:
            raise UnknownCategoryError(f"service {record.service!r} not in table")
        if record.flag not in table.flag_index:
            raise UnknownCategoryError(f"flag {record.flag!r} not in table")
    v = np.empty(ENCODED_WIDTH, dtype=float)
    v[0] = record.numeric[0]
    v[1:4] = table.protocol_codes[record.protocol]
    v[4] = table.service_index.get(record.service, len(table.service_index))
    v[5] = table.flag_index.get(record.flag, len(table.flag_index))
    v[6:] = record.numeric[1:]
    return v


def decode_protocol_columns(v: np.ndarray, table: EncodingTable) -> str:
    """Recover the protocol string from an encoded (un-normalized) vector."""
    bits = tuple(int(round(b)) for b in v[1:4])
    return table.decode_protocol(bits)


def group_attack(
    label: str,
    groups: dict[str, AttackClass] | None = None,
    strict: bool = True,
    default: AttackClass = AttackClass.DOS,
) -> AttackClass:
    """Map a (period-stripped) label to its attack group.

    Unknown labels raise UnknownLabelError in strict mode, otherwise fall
    back to `default`.
    """
    table = groups if groups is not None else DEFAULT_ATTACK_GROUPS
    try:
        return table[label]
    except KeyError:
        if strict:
            raise UnknownLabelError(f"label {label!r} not in attack-group map") from None
        return default


@dataclass
class NormalizationBounds:
    """Per-feature (min, max) fitted on training data."""

    lo: np.ndarray
    hi: np.ndarray


def fit_normalizer(matrix: np.ndarray) -> NormalizationBounds:
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise DimensionMismatchError("need a non-empty 2-D feature matrix")
    return NormalizationBounds(lo=matrix.min(axis=0), hi=matrix.max(axis=0))


def apply_normalizer(bounds: NormalizationBounds, v: np.ndarray) -> np.ndarray:
    """Map each feature by (x - min)/(max - min), clamped to [0, 1].

    Constant training features map to 0 everywhere.
    """
    arr = np.asarray(v, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != bounds.lo.shape[0]:
        raise DimensionMismatchError(
            f"vector width {arr.shape[1]} != fitted width {bounds.lo.shape[0]}"
        )
    span = bounds.hi - bounds.lo
    out = np.zeros_like(arr)
    nz = span > 0
    out[:, nz] = (arr[:, nz] - bounds.lo[nz]) / span[nz]
    np.clip(out, 0.0, 1.0, out=out)
    return out[0] if single else out


@dataclass
class Dataset:
    """Encoded, labeled rows plus the artifacts needed to encode more data."""

    x: np.ndarray                         # (n, width) float matrix
    attack_class: list[AttackClass]
    truth: np.ndarray                     # bool, True = intrusive
    labels: list[str]
    encoding: EncodingTable | None = None
    bounds: NormalizationBounds | None = None
    unknown_label_count: int = 0
    column_names: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return self.x.shape[0]


NUMERIC_NAMES = [
    "duration", "src_bytes", "dst_bytes", "land", "wrong_fragment", "urgent",
    "hot", "num_failed_logins", "logged_in", "num_compromised", "root_shell",
    "su_attempted", "num_root", "num_file_creations", "num_shells",
    "num_access_files", "num_outbound_cmds", "is_host_login", "is_guest_login",
    "count", "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate",
    "srv_rerror_rate", "same_srv_rate", "diff_srv_rate", "srv_diff_host_rate",
    "dst_host_count", "dst_host_srv_count", "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate", "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate", "dst_host_srv_rerror_rate",
]


def encoded_column_names() -> list[str]:
    return (
        [NUMERIC_NAMES[0], "protocol_b2", "protocol_b1", "protocol_b0",
         "service_idx", "flag_idx"]
        + NUMERIC_NAMES[1:]
    )


def parse_file(path: str, strict: bool = True) -> tuple[list[ConnectionRecord], int]:
    """Parse every non-empty line of a KDD-format file.

    Returns (records, field_count_errors).  In strict mode a malformed line
    raises; in lenient mode it is skipped and counted.
    """
    records: list[ConnectionRecord] = []
    bad = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                records.append(parse_record(line))
            except (FieldCountError, NumericParseError):
                if strict:
                    raise
                bad += 1
    return records, bad


def build_dataset(
    records: list[ConnectionRecord],
    encoding: EncodingTable | None = None,
    bounds: NormalizationBounds | None = None,
    groups: dict[str, AttackClass] | None = None,
    strict_labels: bool = True,
) -> Dataset:
    """Encode and normalize records into a Dataset.

    When `encoding`/`bounds` are None they are fitted on these records
    (training); pass the training artifacts to build a test set.  The
    strict flag governs both unknown labels and, at encode time, unseen
    service/flag values (counted and bucketed when lenient).
    """
    if not records:
        raise DimensionMismatchError("no records to build a dataset from")
    if encoding is None:
        encoding = fit_encoding(records)
    lenient = not strict_labels
    raw = np.stack([encode(r, encoding, lenient=lenient) for r in records])
    if bounds is None:
        bounds = fit_normalizer(raw)
    x = apply_normalizer(bounds, raw)
    classes: list[AttackClass] = []
    unknown = 0
    for r in records:
        try:
            classes.append(group_attack(r.label, groups=groups, strict=True))
        except UnknownLabelError:
            unknown += 1
            if strict_labels:
                raise
            classes.append(group_attack(r.label, groups=groups, strict=False))
    truth = np.array([c is not AttackClass.NORMAL for c in classes], dtype=bool)
    return Dataset(
        x=np.atleast_2d(x),
        attack_class=classes,
        truth=truth,
        labels=[r.label for r in records],
        encoding=encoding,
        bounds=bounds,
        unknown_label_count=unknown,
        column_names=encoded_column_names(),
    )


def load_dataset(path: str, strict: bool = True, **kwargs) -> Dataset:
    records, _ = parse_file(path, strict=strict)
    return build_dataset(records, strict_labels=strict, **kwargs)


def sample_split(d: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Reproducible shuffled split; first part gets floor(fraction * n) rows."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction {fraction} outside [0, 1]")
    n = len(d)
    k = int(np.floor(fraction * n))
    order = np.random.default_rng(seed).permutation(n)
    first, second = order[:k], order[k:]

    def take(idx: np.ndarray) -> Dataset:
        return Dataset(
            x=d.x[idx],
            attack_class=[d.attack_class[i] for i in idx],
            truth=d.truth[idx],
            labels=[d.labels[i] for i in idx],
            encoding=d.encoding,
            bounds=d.bounds,
            unknown_label_count=d.unknown_label_count,
            column_names=d.column_names,
        )

    return take(first), take(second)


def dataset_to_csv(d: Dataset, path: str) -> None:
    """Cache the encoded dataset as columnar CSV with a one-line header."""
    header = ",".join(d.column_names + ["attack_class", "intrusive"])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i in range(len(d)):
            row = ",".join(repr(float(v)) for v in d.x[i])
            fh.write(f"{row},{d.attack_class[i].value},{int(d.truth[i])}\n")
