import sys

from dflroute import options


if __name__ == "__main__":
    sys.exit(options.main(sys.argv[1:]))
