from walkssl.cli import main

raise SystemExit(main())
