import sys

from dfrelay_cli.launcher import cli_main

sys.exit(cli_main())
