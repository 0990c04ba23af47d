import sys

from gfdchemo.cli import main

sys.exit(main())
