"""Address clustering heuristics for UTXO and account-based chains."""

from ._addrclust import (
    Amount,
    ChangeDecision,
    DepositInference,
    GenConfig,
    Partition,
    SeedLabel,
    apply_change_heuristic,
    build_exchange_clusters,
    census,
    cluster_common_spending,
    evaluate,
    format_census_table,
    fractional_digits,
    generate_account_chain,
    generate_utxo_chain,
    infer_deposit_addresses,
    load_seed_labels,
    load_transfers,
    load_utxo_transactions,
    parse_amount,
    propagate_labels,
)

__all__ = [
    "Amount",
    "ChangeDecision",
    "DepositInference",
    "GenConfig",
    "Partition",
    "SeedLabel",
    "apply_change_heuristic",
    "build_exchange_clusters",
    "census",
    "cluster_common_spending",
    "evaluate",
    "format_census_table",
    "fractional_digits",
    "generate_account_chain",
    "generate_utxo_chain",
    "infer_deposit_addresses",
    "load_seed_labels",
    "load_transfers",
    "load_utxo_transactions",
    "parse_amount",
    "propagate_labels",
]
