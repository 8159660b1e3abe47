import sys

from holder_metrics.cli import main

if __name__ == '__main__':
    sys.exit(main())
