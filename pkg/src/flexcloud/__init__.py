"""flexcloud: keyword search with refinable term clouds, plus a declarative
recommendation-workflow algebra with a reference executor and a SQL
compiler, served over a CLI and an HTTP JSON API."""

__version__ = "0.1.0"
