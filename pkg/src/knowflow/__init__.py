"""Knowledge-flow networks between technological domains, and link prediction over them."""

__version__ = "0.1.0"
