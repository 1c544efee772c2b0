from .store import DecisionStore, StoredDecision, export_accepted
from .service import create_app

__all__ = ["DecisionStore", "StoredDecision", "export_accepted", "create_app"]
