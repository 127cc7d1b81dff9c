import sys

from trotterchem.cli import main

sys.exit(main())
