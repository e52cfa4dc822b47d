"""Place MovieLens-100K ratings at data/ml-100k/u.data.

Tries the GroupLens archive first. Where that host is unreachable, the copy of
the same 100,000 ratings shipped inside the RecBole wheel is used instead
(fetched with ``pip download``, so any configured package mirror works) and
rewritten in the original tab-separated layout.
"""

import argparse
import hashlib
import io
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

GROUPLENS = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL_MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"
DEST = Path(__file__).resolve().parents[1] / "data" / "ml-100k" / "u.data"
MD5 = "6e47046882bad158b0efbb84cd5cb987"


def from_grouplens() -> bytes:
    with urllib.request.urlopen(GROUPLENS, timeout=30) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data")


def from_recbole_wheel() -> bytes:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "--only-binary", ":all:", "-d", tmp, "recbole"],
            check=True,
            stdout=subprocess.DEVNULL,
        )
        wheel = next(Path(tmp).glob("recbole-*.whl"))
        text = zipfile.ZipFile(wheel).read(WHEEL_MEMBER).decode("utf-8")
    out = []
    for line in text.splitlines()[1:]:  # header names the typed columns
        if line.strip():
            user, item, rating, ts = line.split("\t")
            out.append(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")
    return "".join(out).encode()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dest", type=Path, default=DEST)
    args = ap.parse_args(argv)
    try:
        data = from_grouplens()
        source = "grouplens"
    except OSError as exc:
        print(f"GroupLens unreachable ({exc}); using the RecBole wheel copy", file=sys.stderr)
        data = from_recbole_wheel()
        source = "recbole wheel"
    args.dest.parent.mkdir(parents=True, exist_ok=True)
    args.dest.write_bytes(data)
    digest = hashlib.md5(data).hexdigest()
    lines = data.count(b"\n")
    print(f"wrote {args.dest} from {source}: {lines} ratings, md5 {digest}")
    if source == "recbole wheel" and digest != MD5:
        print(f"warning: expected md5 {MD5}", file=sys.stderr)


if __name__ == "__main__":
    main()
