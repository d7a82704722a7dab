"""Command-line entry point: rain run | verify | sweep."""
