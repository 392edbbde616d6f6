"""Run the toolkit with ``python -m drs_toolkit``."""
from .cli import main

raise SystemExit(main())
