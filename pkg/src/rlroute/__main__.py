import sys

from rlroute.cli import main

sys.exit(main())
