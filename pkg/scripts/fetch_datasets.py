#!/usr/bin/env python3
"""Download graph-classification benchmarks into ./data/<NAME>/.

The toolkit itself never downloads anything; run this once on a machine with
network access, or drop the flat files into data/<NAME>/ yourself.  Files
come from the public TU benchmark collection.
"""

import argparse
import io
import os
import shutil
import sys
import urllib.request
import zipfile

BASE_URL = "https://www.chrsmrrs.com/graphkerneldatasets"
DEFAULT_NAMES = ["MUTAG", "PTC_MR", "IMDB-BINARY", "IMDB-MULTI", "COLLAB"]


def fetch(name: str, dest_root: str) -> str:
    url = f"{BASE_URL}/{name}.zip"
    print(f"fetching {url} ...")
    with urllib.request.urlopen(url) as resp:
        payload = resp.read()
    dest = os.path.join(dest_root, name)
    os.makedirs(dest_root, exist_ok=True)
    with zipfile.ZipFile(io.BytesIO(payload)) as zf:
        tmp = os.path.join(dest_root, f".{name}.tmp")
        zf.extractall(tmp)
        # Zips contain a single <name>/ directory with the flat files.
        inner = os.path.join(tmp, name)
        src = inner if os.path.isdir(inner) else tmp
        if os.path.isdir(dest):
            shutil.rmtree(dest)
        shutil.move(src, dest)
        shutil.rmtree(tmp, ignore_errors=True)
    print(f"  -> {dest}")
    return dest


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("names", nargs="*", default=DEFAULT_NAMES,
                        help=f"dataset names (default: {' '.join(DEFAULT_NAMES)})")
    parser.add_argument("--dest", default="data", help="destination root directory")
    args = parser.parse_args()
    failures = 0
    for name in args.names or DEFAULT_NAMES:
        try:
            fetch(name, args.dest)
        except Exception as exc:  # noqa: BLE001 - report and continue
            print(f"  failed: {exc}", file=sys.stderr)
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
