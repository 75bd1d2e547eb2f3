from bellbench.cli import main

raise SystemExit(main())
