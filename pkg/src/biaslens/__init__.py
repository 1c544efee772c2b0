"""Pipeline for flagging gendered and gender-biased language in archival
catalog metadata: classifier cascades under cross-validation, loose-match
agreement scoring, dashboard reports, and a human-in-the-loop review
service."""

__version__ = "0.1.0"
