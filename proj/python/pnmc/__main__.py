"""`python -m pnmc ...` runs the command-line tool in process."""

import sys

from ._pnmc import run_cli


def main(argv=None):
    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
