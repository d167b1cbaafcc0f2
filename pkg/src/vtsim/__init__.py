"""Vehicle transmission scheduling for RSU-coordinated event reporting."""

__version__ = "0.1.0"
