import sys

from ndks.cli import main

sys.exit(main())
