import pytest

import addrclust


def test_amounts_are_exact():
    value = addrclust.parse_amount("174.65893626", 18)
    assert value.base_units == 174658936260000000000
    assert addrclust.fractional_digits(value) == 8
    fee = addrclust.parse_amount("137.8303045", 18) - addrclust.parse_amount("137.8298845", 18)
    assert str(fee) == "0.00042"
    with pytest.raises(ValueError):
        addrclust.parse_amount("1.2.3", 8)


def test_partition():
    p = addrclust.Partition()
    assert p.intern("A") == 0
    assert p.unite("A", "B")
    assert not p.unite("B", "A")
    p.intern("C")
    clusters = p.finalize()
    assert [c.addresses for c in clusters] == [["A", "B"], ["C"]]
    assert clusters[0].heuristics == ["common_spending"]


def test_change_heuristic():
    text = "\n".join([
        '{"txid":"cb","block":0,"index":0,"coinbase":true,"inputs":[],'
        '"outputs":[{"address":"W1","value":"1"},{"address":"W2","value":"1"},{"address":"M","value":"1"}]}',
        '{"txid":"pay","block":1,"index":0,"coinbase":false,'
        '"inputs":[{"address":"W1","value":"1"},{"address":"W2","value":"1"}],'
        '"outputs":[{"address":"M","value":"0.5"},{"address":"CH","value":"0.12345678"}]}',
    ])
    txs = addrclust.load_utxo_transactions(text, 8)
    p = addrclust.Partition()
    addrclust.cluster_common_spending(txs, p)
    decisions = addrclust.apply_change_heuristic(txs, p)
    assert [d.outcome for d in decisions] == ["abstained", "inferred"]
    assert decisions[0].reason == "coinbase"
    assert decisions[1].address == "CH"
    assert p.same_cluster("W1", "CH")


def test_deposit_inference_and_labels():
    transfers = addrclust.load_transfers(
        '{"hash":"a","block":1,"index":0,"from":"X","to":"D","value":"137.8303045","asset":"ETH"}\n'
        '{"hash":"b","block":2,"index":0,"from":"D","to":"H","value":"137.8298845","asset":"ETH"}\n',
        18,
    )
    seeds = addrclust.load_seed_labels("address,name,category,source\nH,binance.com,exchange,etherscan\n")
    inferences = addrclust.infer_deposit_addresses(transfers, seeds)
    by_address = {d.address: d for d in inferences}
    assert by_address["D"].outcome == "inferred"
    assert by_address["D"].entity == "binance.com"
    assert by_address["X"].reason == "sends_elsewhere"

    p = addrclust.Partition()
    addrclust.build_exchange_clusters(inferences, seeds, p)
    labeled = addrclust.propagate_labels(p.finalize(), seeds)
    assert labeled[0].label == ("binance.com", "exchange")
    assert addrclust.census(labeled) == [("exchange", "binance.com", 2), ("-", "(unlabeled)", 0)]
    assert "binance.com" in addrclust.format_census_table(labeled)


def test_synthetic_evaluation():
    cfg = addrclust.GenConfig(rng_seed=3, n_transactions=1000)
    txs, truth = addrclust.generate_utxo_chain(cfg)
    assert len(txs) == 1000
    p = addrclust.Partition()
    addrclust.cluster_common_spending(txs, p)
    decisions = addrclust.apply_change_heuristic(txs, p)
    report = addrclust.evaluate(p.finalize(), truth, decisions=decisions)
    assert report["change"]["precision"] == 1.0
    assert report["change"]["eligible_recall"] == 1.0

    acct = addrclust.GenConfig(n_entities=2, wallets_per_entity=10, n_transactions=50, decimals=18)
    transfers, truth, seeds = addrclust.generate_account_chain(acct)
    inferences = addrclust.infer_deposit_addresses(transfers, seeds)
    assert sum(d.outcome == "inferred" for d in inferences) == 20
    with pytest.raises(ValueError):
        addrclust.GenConfig(no_such_key=1)
