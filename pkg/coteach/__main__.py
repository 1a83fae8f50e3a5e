import sys

from coteach.main import main

sys.exit(main())
