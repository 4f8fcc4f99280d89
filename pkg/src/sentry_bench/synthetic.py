"""Seeded generator of KDD'99-format connection logs.

Emits files in the exact wire format of the public corpus: 41 comma-separated
features plus a label with a trailing period, no header.  Traffic profiles
mimic the published distribution (DoS-dominated attack mass, ~20% normal
traffic, a long tail of probe/R2L/U2R labels, and test-only attack names
absent from training).  Useful wherever the real corpus is not on disk;
every byte is reproducible from the seed.
"""

from __future__ import annotations

import numpy as np

# (feature-name, low, high) ranges; values outside a profile default to 0.
# Integer-ish features are rounded on emission.
_INT_FEATURES = {
    "duration", "src_bytes", "dst_bytes", "land", "wrong_fragment", "urgent",
    "hot", "num_failed_logins", "logged_in", "num_compromised", "root_shell",
    "su_attempted", "num_root", "num_file_creations", "num_shells",
    "num_access_files", "num_outbound_cmds", "is_host_login", "is_guest_login",
    "count", "srv_count", "dst_host_count", "dst_host_srv_count",
}

_FEATURE_ORDER = [
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


def _p(protocol, service, flag, **ranges):
    return {"protocol": protocol, "service": service, "flag": flag, "ranges": ranges}


# Normal traffic sub-profiles (service mix as in office/web traffic).
_NORMAL_PROFILES = [
    (0.42, _p("tcp", "http", "SF", duration=(0, 5), src_bytes=(150, 400),
              dst_bytes=(300, 12000), logged_in=(1, 1), count=(1, 25),
              srv_count=(1, 25), same_srv_rate=(0.9, 1.0),
              dst_host_count=(10, 255), dst_host_srv_count=(10, 255),
              dst_host_same_srv_rate=(0.8, 1.0))),
    (0.18, _p("tcp", "smtp", "SF", duration=(0, 10), src_bytes=(600, 1500),
              dst_bytes=(300, 500), logged_in=(1, 1), count=(1, 10),
              srv_count=(1, 10), same_srv_rate=(0.8, 1.0),
              dst_host_count=(20, 255), dst_host_srv_count=(5, 120),
              dst_host_same_srv_rate=(0.3, 0.9))),
    (0.14, _p("udp", "domain_u", "SF", duration=(0, 1), src_bytes=(35, 60),
              dst_bytes=(40, 200), count=(1, 60), srv_count=(1, 60),
              same_srv_rate=(0.9, 1.0), dst_host_count=(50, 255),
              dst_host_srv_count=(50, 255), dst_host_same_srv_rate=(0.9, 1.0))),
    (0.12, _p("tcp", "ftp_data", "SF", duration=(0, 3), src_bytes=(2000, 30000),
              dst_bytes=(0, 0), logged_in=(1, 1), count=(1, 8), srv_count=(1, 8),
              same_srv_rate=(0.9, 1.0), dst_host_count=(5, 150),
              dst_host_srv_count=(5, 150), dst_host_same_src_port_rate=(0.3, 1.0))),
    (0.09, _p("udp", "private", "SF", duration=(0, 1), src_bytes=(40, 110),
              dst_bytes=(40, 110), count=(1, 50), srv_count=(1, 50),
              same_srv_rate=(0.9, 1.0), dst_host_count=(100, 255),
              dst_host_srv_count=(100, 255), dst_host_same_srv_rate=(0.9, 1.0))),
    (0.05, _p("tcp", "telnet", "SF", duration=(5, 120), src_bytes=(100, 1500),
              dst_bytes=(200, 4000), logged_in=(1, 1), count=(1, 5),
              srv_count=(1, 5), same_srv_rate=(0.8, 1.0),
              dst_host_count=(1, 60), dst_host_srv_count=(1, 60))),
]

# Attack profiles; weights below are relative within train/test mixes.
_ATTACK_PROFILES = {
    "smurf": _p("icmp", "ecr_i", "SF", src_bytes=(520, 1032), count=(350, 511),
                srv_count=(350, 511), same_srv_rate=(1, 1),
                dst_host_count=(255, 255), dst_host_srv_count=(255, 255),
                dst_host_same_srv_rate=(1, 1)),
    "neptune": _p("tcp", "private", "S0", count=(80, 511), srv_count=(1, 20),
                  serror_rate=(0.95, 1.0), srv_serror_rate=(0.95, 1.0),
                  same_srv_rate=(0.0, 0.1), diff_srv_rate=(0.05, 0.1),
                  dst_host_count=(255, 255), dst_host_srv_count=(1, 30),
                  dst_host_serror_rate=(0.95, 1.0),
                  dst_host_srv_serror_rate=(0.95, 1.0)),
    "back": _p("tcp", "http", "SF", src_bytes=(50000, 54540), dst_bytes=(2000, 8314),
               hot=(2, 3), logged_in=(1, 1), count=(2, 12), srv_count=(2, 12),
               same_srv_rate=(1, 1), dst_host_count=(1, 255),
               dst_host_srv_count=(1, 255)),
    "teardrop": _p("udp", "private", "SF", wrong_fragment=(3, 3), count=(80, 511),
                   srv_count=(80, 511), same_srv_rate=(1, 1),
                   dst_host_count=(250, 255), dst_host_srv_count=(250, 255)),
    "pod": _p("icmp", "ecr_i", "SF", wrong_fragment=(1, 1), src_bytes=(1480, 1480),
              count=(1, 20), srv_count=(1, 20), dst_host_count=(100, 255),
              dst_host_srv_count=(100, 255)),
    "land": _p("tcp", "finger", "S0", land=(1, 1), count=(1, 5), srv_count=(1, 5),
               serror_rate=(1, 1), srv_serror_rate=(1, 1),
               dst_host_serror_rate=(0.8, 1.0)),
    "ipsweep": _p("icmp", "eco_i", "SF", src_bytes=(8, 20), count=(1, 5),
                  srv_count=(1, 5), same_srv_rate=(1, 1),
                  dst_host_count=(1, 10), dst_host_srv_count=(1, 60),
                  dst_host_same_src_port_rate=(1, 1),
                  dst_host_srv_diff_host_rate=(0.5, 1.0)),
    "portsweep": _p("tcp", "private", "REJ", count=(1, 10), srv_count=(1, 3),
                    rerror_rate=(0.9, 1.0), srv_rerror_rate=(0.9, 1.0),
                    diff_srv_rate=(0.7, 1.0), dst_host_count=(200, 255),
                    dst_host_diff_srv_rate=(0.7, 1.0),
                    dst_host_rerror_rate=(0.9, 1.0)),
    "satan": _p("tcp", "other", "REJ", count=(1, 20), srv_count=(1, 10),
                rerror_rate=(0.7, 1.0), srv_rerror_rate=(0.7, 1.0),
                diff_srv_rate=(0.6, 1.0), dst_host_count=(200, 255),
                dst_host_diff_srv_rate=(0.5, 1.0),
                dst_host_rerror_rate=(0.6, 1.0)),
    "nmap": _p("icmp", "eco_i", "SF", src_bytes=(8, 8), count=(1, 3),
               srv_count=(1, 3), dst_host_count=(1, 30),
               dst_host_same_src_port_rate=(1, 1)),
    "guess_passwd": _p("tcp", "pop_3", "SF", duration=(0, 5), src_bytes=(20, 130),
                       dst_bytes=(70, 180), num_failed_logins=(1, 5), hot=(1, 2),
                       count=(1, 4), srv_count=(1, 4),
                       dst_host_count=(1, 30), dst_host_srv_count=(1, 30)),
    "warezclient": _p("tcp", "ftp", "SF", duration=(0, 200), src_bytes=(100, 1200),
                      dst_bytes=(300, 5000), logged_in=(1, 1), is_guest_login=(1, 1),
                      hot=(1, 30), count=(1, 6), srv_count=(1, 6),
                      dst_host_count=(1, 80), dst_host_srv_count=(1, 80)),
    "ftp_write": _p("tcp", "ftp", "SF", duration=(10, 130), src_bytes=(150, 450),
                    dst_bytes=(200, 500), logged_in=(1, 1), is_guest_login=(1, 1),
                    num_file_creations=(1, 2), num_access_files=(1, 2),
                    count=(1, 3), srv_count=(1, 3)),
    "imap": _p("tcp", "imap4", "RSTO", duration=(0, 10), src_bytes=(0, 1500),
               count=(1, 3), srv_count=(1, 3), rerror_rate=(0.5, 1.0)),
    "multihop": _p("tcp", "telnet", "SF", duration=(30, 500), src_bytes=(150, 2000),
                   dst_bytes=(300, 9000), logged_in=(1, 1), hot=(1, 8),
                   num_compromised=(0, 2), count=(1, 3), srv_count=(1, 3)),
    "phf": _p("tcp", "http", "SF", src_bytes=(51, 51), dst_bytes=(8127, 8127),
              logged_in=(1, 1), count=(1, 3), srv_count=(1, 3)),
    "spy": _p("tcp", "telnet", "SF", duration=(100, 700), src_bytes=(100, 400),
              dst_bytes=(200, 800), logged_in=(1, 1), hot=(1, 3), count=(1, 2),
              srv_count=(1, 2)),
    "warezmaster": _p("tcp", "ftp", "SF", duration=(0, 100), src_bytes=(300, 1000),
                      dst_bytes=(500, 4000), logged_in=(1, 1), is_guest_login=(1, 1),
                      hot=(10, 40), count=(1, 4), srv_count=(1, 4)),
    "buffer_overflow": _p("tcp", "telnet", "SF", duration=(60, 330),
                          src_bytes=(1000, 3000), dst_bytes=(300, 8000),
                          logged_in=(1, 1), hot=(2, 5), root_shell=(1, 1),
                          num_compromised=(1, 2), num_root=(1, 3),
                          num_file_creations=(1, 3), count=(1, 3), srv_count=(1, 3)),
    "loadmodule": _p("tcp", "telnet", "SF", duration=(30, 200), src_bytes=(200, 1500),
                     dst_bytes=(300, 3000), logged_in=(1, 1), root_shell=(1, 1),
                     num_file_creations=(1, 4), count=(1, 2), srv_count=(1, 2)),
    "perl": _p("tcp", "telnet", "SF", duration=(20, 130), src_bytes=(200, 1300),
               dst_bytes=(300, 2000), logged_in=(1, 1), root_shell=(1, 1),
               num_root=(1, 2), count=(1, 2), srv_count=(1, 2)),
    "rootkit": _p("tcp", "telnet", "SF", duration=(30, 350), src_bytes=(200, 1800),
                  dst_bytes=(300, 4000), logged_in=(1, 1), root_shell=(1, 1),
                  num_root=(1, 5), num_file_creations=(1, 4), count=(1, 2),
                  srv_count=(1, 2)),
    # --- test-only attack names -------------------------------------------
    "processtable": _p("tcp", "telnet", "S0", duration=(100, 800), count=(80, 400),
                       srv_count=(80, 400), serror_rate=(0.9, 1.0),
                       srv_serror_rate=(0.9, 1.0), dst_host_count=(255, 255),
                       dst_host_serror_rate=(0.9, 1.0)),
    "mailbomb": _p("tcp", "smtp", "SF", src_bytes=(1000, 4000), dst_bytes=(300, 400),
                   count=(150, 511), srv_count=(150, 511), same_srv_rate=(1, 1),
                   dst_host_count=(255, 255), dst_host_srv_count=(255, 255)),
    "apache2": _p("tcp", "http", "SF", src_bytes=(10000, 50000), dst_bytes=(0, 400),
                  count=(80, 511), srv_count=(80, 511), same_srv_rate=(1, 1),
                  dst_host_count=(255, 255), dst_host_srv_count=(255, 255)),
    "udpstorm": _p("udp", "echo", "SF", src_bytes=(28, 28), count=(300, 511),
                   srv_count=(300, 511), same_srv_rate=(1, 1),
                   dst_host_count=(255, 255), dst_host_srv_count=(255, 255)),
    "saint": _p("tcp", "other", "REJ", count=(1, 30), srv_count=(1, 10),
                rerror_rate=(0.8, 1.0), srv_rerror_rate=(0.8, 1.0),
                diff_srv_rate=(0.7, 1.0), dst_host_count=(220, 255),
                dst_host_diff_srv_rate=(0.6, 1.0), dst_host_rerror_rate=(0.8, 1.0)),
    "mscan": _p("tcp", "private", "RSTR", count=(1, 40), srv_count=(1, 10),
                rerror_rate=(0.7, 1.0), srv_rerror_rate=(0.7, 1.0),
                diff_srv_rate=(0.8, 1.0), dst_host_count=(230, 255),
                dst_host_diff_srv_rate=(0.8, 1.0), dst_host_rerror_rate=(0.7, 1.0)),
    "snmpgetattack": _p("udp", "private", "SF", src_bytes=(105, 105),
                        dst_bytes=(105, 147), count=(80, 511), srv_count=(80, 511),
                        same_srv_rate=(1, 1), dst_host_count=(255, 255),
                        dst_host_srv_count=(255, 255),
                        dst_host_same_src_port_rate=(0.9, 1.0)),
    "snmpguess": _p("udp", "private", "SF", src_bytes=(44, 44), dst_bytes=(0, 0),
                    count=(50, 400), srv_count=(50, 400), same_srv_rate=(1, 1),
                    dst_host_count=(255, 255),
                    dst_host_same_src_port_rate=(0.9, 1.0)),
    "named": _p("tcp", "domain", "SF", duration=(0, 3), src_bytes=(200, 1300),
                dst_bytes=(200, 1100), hot=(1, 2), count=(1, 3), srv_count=(1, 3)),
    "sendmail": _p("tcp", "smtp", "SF", duration=(1, 30), src_bytes=(1500, 5000),
                   dst_bytes=(300, 500), hot=(1, 2), logged_in=(1, 1),
                   count=(1, 3), srv_count=(1, 3)),
    "xsnoop": _p("tcp", "X11", "SF", duration=(0, 30), src_bytes=(100, 1500),
                 dst_bytes=(100, 2000), logged_in=(1, 1), count=(1, 2),
                 srv_count=(1, 2)),
    "xlock": _p("tcp", "X11", "SF", duration=(0, 60), src_bytes=(100, 1500),
                dst_bytes=(100, 2000), logged_in=(1, 1), hot=(1, 2), count=(1, 2),
                srv_count=(1, 2)),
    "worm": _p("tcp", "http", "REJ", src_bytes=(0, 300), count=(20, 200),
               srv_count=(20, 200), rerror_rate=(0.8, 1.0),
               dst_host_rerror_rate=(0.8, 1.0)),
    "ps": _p("tcp", "telnet", "SF", duration=(30, 250), src_bytes=(200, 1800),
             dst_bytes=(300, 4000), logged_in=(1, 1), root_shell=(1, 1),
             num_file_creations=(1, 4), hot=(1, 4), count=(1, 2), srv_count=(1, 2)),
    "xterm": _p("tcp", "telnet", "SF", duration=(60, 300), src_bytes=(300, 1800),
                dst_bytes=(300, 5000), logged_in=(1, 1), root_shell=(1, 1),
                num_compromised=(1, 2), hot=(1, 4), count=(1, 2), srv_count=(1, 2)),
    "sqlattack": _p("tcp", "sql_net", "SF", duration=(10, 150), src_bytes=(300, 2000),
                    dst_bytes=(300, 4000), logged_in=(1, 1), root_shell=(1, 1),
                    count=(1, 2), srv_count=(1, 2)),
    "httptunnel": _p("tcp", "http", "SF", duration=(100, 700), src_bytes=(300, 2000),
                     dst_bytes=(300, 9000), logged_in=(1, 1), hot=(1, 3),
                     count=(1, 3), srv_count=(1, 3)),
}

# Label mix per corpus flavor, shaped like the published distributions:
# DoS-dominated, ~19.7% normal in training; the test mix swaps in novel
# attack names at small shares.
TRAIN_MIX = [
    ("normal", 0.1970), ("smurf", 0.5230), ("neptune", 0.2130),
    ("back", 0.0230), ("satan", 0.0110), ("ipsweep", 0.0085),
    ("portsweep", 0.0075), ("warezclient", 0.0060), ("teardrop", 0.0055),
    ("pod", 0.0020), ("nmap", 0.0012), ("guess_passwd", 0.0008),
    ("buffer_overflow", 0.0004), ("land", 0.0003), ("warezmaster", 0.0003),
    ("imap", 0.0002), ("rootkit", 0.0002), ("loadmodule", 0.0002),
    ("ftp_write", 0.0002), ("multihop", 0.0002), ("phf", 0.0001),
    ("perl", 0.0001), ("spy", 0.0001), ("missing", 0.0002),
]
TEST_MIX = [
    ("normal", 0.1950), ("smurf", 0.5280), ("neptune", 0.1860),
    ("snmpgetattack", 0.0240), ("mailbomb", 0.0160), ("guess_passwd", 0.0140),
    ("snmpguess", 0.0077), ("satan", 0.0052), ("mscan", 0.0034),
    ("back", 0.0035), ("apache2", 0.0026), ("processtable", 0.0024),
    ("saint", 0.0023), ("portsweep", 0.0011), ("ipsweep", 0.0010),
    ("httptunnel", 0.0005), ("pod", 0.0003), ("nmap", 0.0003),
    ("teardrop", 0.0004), ("udpstorm", 0.0001), ("named", 0.0006),
    ("sendmail", 0.0005), ("xlock", 0.0003), ("xsnoop", 0.0002),
    ("worm", 0.0001), ("ps", 0.0005), ("xterm", 0.0004),
    ("sqlattack", 0.0001), ("buffer_overflow", 0.0007), ("rootkit", 0.0004),
    ("land", 0.0001), ("missing", 0.0015), ("ambiguous", 0.0018),
]


def _emit(rng: np.random.Generator, profile: dict, label: str) -> str:
    values = {}
    for name, (lo, hi) in profile["ranges"].items():
        x = rng.uniform(lo, hi) if hi > lo else float(lo)
        values[name] = x
    parts = []
    for i, name in enumerate(_FEATURE_ORDER):
        x = values.get(name, 0.0)
        if name in _INT_FEATURES:
            parts.append(str(int(round(x))))
        else:
            parts.append(f"{x:.2f}")
        if i == 0:
            parts.extend([profile["protocol"], profile["service"], profile["flag"]])
    return ",".join(parts) + f",{label}."


def _pick_profile(rng: np.random.Generator, label: str) -> tuple[dict, str]:
    if label == "normal":
        weights = np.array([w for w, _ in _NORMAL_PROFILES])
        idx = rng.choice(len(_NORMAL_PROFILES), p=weights / weights.sum())
        return _NORMAL_PROFILES[idx][1], "normal"
    if label == "missing":
        # attack traffic that statistically blends into the normal profile
        # (the irreducible error floor of the corpus)
        base = _NORMAL_PROFILES[0][1]
        return base, rng.choice(["spy", "multihop", "httptunnel"])
    if label == "ambiguous":
        # normal traffic with attack-like volume spikes
        prof = _p("tcp", "http", "SF", duration=(0, 5), src_bytes=(150, 400),
                  dst_bytes=(300, 12000), logged_in=(1, 1), count=(150, 400),
                  srv_count=(150, 400), same_srv_rate=(0.9, 1.0),
                  dst_host_count=(200, 255), dst_host_srv_count=(200, 255),
                  dst_host_same_srv_rate=(0.8, 1.0))
        return prof, "normal"
    return _ATTACK_PROFILES[label], label


def generate_kdd_lines(n_rows: int, seed: int, mix=None) -> list[str]:
    """Generate `n_rows` KDD-format lines, reproducibly from `seed`."""
    mix = TRAIN_MIX if mix is None else mix
    rng = np.random.default_rng(seed)
    names = [m[0] for m in mix]
    weights = np.array([m[1] for m in mix], dtype=float)
    weights = weights / weights.sum()
    picks = rng.choice(len(names), size=n_rows, p=weights)
    lines = []
    for k in picks:
        profile, label = _pick_profile(rng, names[k])
        lines.append(_emit(rng, profile, label))
    return lines


def generate_kdd_file(path: str, n_rows: int, seed: int, flavor: str = "train") -> None:
    """Write a KDD-format file; flavor 'train' or 'test' selects the label mix."""
    mix = TRAIN_MIX if flavor == "train" else TEST_MIX
    lines = generate_kdd_lines(n_rows, seed, mix=mix)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
