#!/usr/bin/env python3
"""Fetch the benchmark series into data/.

laser.txt
    Santa Fe laser intensity (10093 samples). Taken from the dataset file
    bundled in the reservoirpy 0.4.2 wheel on PyPI (MIT licence) and min-max
    scaled to [0, 1].

SN_m_tot_V2.0.csv
    Monthly mean total sunspot number, version 2.0, from the SILSO World
    Data Center (https://www.sidc.be/SILSO/INFO/snmtotcsv.php). Download it
    by hand if this script cannot reach the server.

Existing files are left alone, so running the script twice is cheap.
"""

import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

import numpy as np

WHEEL_SPEC = "reservoirpy==0.4.2"
LASER_MEMBER = "reservoirpy/datasets/santafe_laser.npy"
LASER_LENGTH = 10093
SILSO_URL = "https://www.sidc.be/SILSO/INFO/snmtotcsv.php"


def laser_ok(path):
    if not path.exists():
        return False
    try:
        values = np.loadtxt(path)
    except ValueError:
        return False
    return values.shape == (LASER_LENGTH,)


def find_wheel(directory):
    wheels = sorted(pathlib.Path(directory).glob("reservoirpy-0.4.2-*.whl"))
    return wheels[0] if wheels else None


def fetch_laser(out, wheel=None):
    if laser_ok(out):
        print(f"{out}: present")
        return True
    with tempfile.TemporaryDirectory() as tmp:
        if wheel is None:
            cmd = [sys.executable, "-m", "pip", "download", "--disable-pip-version-check", "--no-deps",
                   "--only-binary=:all:", "-d", tmp, WHEEL_SPEC]
            if subprocess.run(cmd, stdout=subprocess.DEVNULL).returncode != 0:
                print(f"pip download {WHEEL_SPEC} failed", file=sys.stderr)
                return False
            wheel = find_wheel(tmp)
            if wheel is None:
                print("downloaded wheel not found", file=sys.stderr)
                return False
        with zipfile.ZipFile(wheel) as zf:
            raw = np.load(io.BytesIO(zf.read(LASER_MEMBER))).astype(np.float64).ravel()
    if raw.shape != (LASER_LENGTH,):
        print(f"unexpected laser shape {raw.shape}", file=sys.stderr)
        return False
    scaled = (raw - raw.min()) / (raw.max() - raw.min())
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp_out = out.with_suffix(".tmp")
    np.savetxt(tmp_out, scaled, fmt="%.17g")
    tmp_out.replace(out)
    print(f"{out}: wrote {scaled.size} values")
    return True


def fetch_sunspots(out, timeout):
    if out.exists() and out.stat().st_size > 0:
        print(f"{out}: present")
        return True
    try:
        with urllib.request.urlopen(SILSO_URL, timeout=timeout) as resp:
            body = resp.read()
    except OSError as exc:
        print(f"{out}: not downloaded ({exc}); fetch {SILSO_URL} manually", file=sys.stderr)
        return False
    out.write_bytes(body)
    print(f"{out}: wrote {len(body)} bytes")
    return True


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data-dir", type=pathlib.Path, default=root / "data")
    ap.add_argument("--wheel", type=pathlib.Path, help="use a local reservoirpy 0.4.2 wheel")
    ap.add_argument("--skip-sunspots", action="store_true")
    ap.add_argument("--timeout", type=float, default=10.0)
    args = ap.parse_args()

    ok = fetch_laser(args.data_dir / "laser.txt", args.wheel)
    if not args.skip_sunspots:
        # The sunspot file is optional; its absence is reported, not fatal.
        fetch_sunspots(args.data_dir / "SN_m_tot_V2.0.csv", args.timeout)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
