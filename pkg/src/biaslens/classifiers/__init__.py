from .forest import LcModel, RandomForestBinary, predict_lc, predict_lc_scores, train_lc
from .crf import PnocModel, arow_update, make_tags, path_margin, predict_pnoc, train_pnoc
from .sgd import OscModel, predict_osc, train_osc

__all__ = [
    "RandomForestBinary",
    "LcModel", "train_lc", "predict_lc", "predict_lc_scores",
    "PnocModel", "make_tags", "train_pnoc", "predict_pnoc", "path_margin",
    "arow_update",
    "OscModel", "train_osc", "predict_osc",
]
