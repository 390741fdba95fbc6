import sys

from ramiforge.main import main

sys.exit(main())
