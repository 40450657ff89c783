"""
Data model - observation tables, treatment coding, splits and CSV IO
"""

from .table import (
    ObservationTable,
    SplitIndex,
    TreatmentCoding,
    features_from_frame,
    read_features_csv,
    read_table_csv,
    split_train_test,
    subpopulation,
    table_to_frame,
    validate_table,
    write_table_csv,
)

__all__ = [
    'ObservationTable',
    'SplitIndex',
    'TreatmentCoding',
    'features_from_frame',
    'read_features_csv',
    'read_table_csv',
    'split_train_test',
    'subpopulation',
    'table_to_frame',
    'validate_table',
    'write_table_csv',
]
