import sys

from partition_force.cli import main

sys.exit(main())
