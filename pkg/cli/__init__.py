"""ktree command-line interface: ingest, build, search, eval and bench."""
