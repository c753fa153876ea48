import sys

from enosv.cli import main

sys.exit(main())
