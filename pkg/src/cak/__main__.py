import sys

from cak.cli import main

sys.exit(main())
