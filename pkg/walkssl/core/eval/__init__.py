"""eval: retrieval mAP, linear SVM classification and evaluation reports."""

from .retrieval import (
    RetrievalIndex,
    build_index,
    retrieve,
    average_precision,
    query_ap,
    precision_at_k,
    retrieval_report,
    mean_average_precision,
)
from .svm import (
    DEFAULT_REG_GRID,
    SvmModel,
    svm_train,
    svm_predict,
    svm_predict_many,
    accuracy,
    confusion_matrix,
    holdout_split,
    svm_grid_search,
    classification_report,
)
from .report import REPORT_METRICS, write_report, read_report, compare_reports


__all__ = [
    "RetrievalIndex",
    "build_index",
    "retrieve",
    "average_precision",
    "query_ap",
    "precision_at_k",
    "retrieval_report",
    "mean_average_precision",
    "DEFAULT_REG_GRID",
    "SvmModel",
    "svm_train",
    "svm_predict",
    "svm_predict_many",
    "accuracy",
    "confusion_matrix",
    "holdout_split",
    "svm_grid_search",
    "classification_report",
    "REPORT_METRICS",
    "write_report",
    "read_report",
    "compare_reports",
]
