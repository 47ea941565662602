import sys

from thermaltime.cli import main

sys.exit(main())
