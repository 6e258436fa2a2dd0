import sys

from smrls.cli import main

sys.exit(main())
