"""Decision procedures for infinite derivations of Büchi process rewrite systems."""

__version__ = "0.1.0"
