"""Allow ``python -m blocklanczos``."""

from blocklanczos.cli import main

raise SystemExit(main())
