"""CLI entry point for wavelocate."""

from wavelocate.cli import main

if __name__ == "__main__":
    main()
