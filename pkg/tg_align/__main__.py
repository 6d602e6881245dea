import sys

from tg_align.cli import main

sys.exit(main())
