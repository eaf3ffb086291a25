import sys

from trotterqpe.cli import main

sys.exit(main())
