import pytest

from seoaudit.netio import live_request_count
from seoaudit.textscore import DEFAULT_TOPIC_CLASSES, BagOfWordsScorer


def pytest_sessionfinish(session, exitstatus):
    # the whole suite must run network-free (playback transports only)
    if live_request_count() != 0:
        session.exitstatus = 1
        print(f"\nERROR: {live_request_count()} live network request(s) during the test run")

# Small fixture corpora with disjoint vocabularies per class, so posterior
# checks have clean expected winners.
TOPIC_DOCS = {
    name: [
        f"{name} about{name} reading{name} notes{name} daily{name}",
        f"{name} guide{name} intro{name}",
    ]
    for name in DEFAULT_TOPIC_CLASSES
}

MALICIOUS_DOCS = ["jackpot casino bonus bet win free chips stake wager spins payout"]
BENIGN_DOCS = ["weather garden tomato recipe hiking trail map picnic lantern bread"]


@pytest.fixture(scope="session")
def scorer():
    return BagOfWordsScorer(TOPIC_DOCS, MALICIOUS_DOCS, BENIGN_DOCS)


@pytest.fixture(scope="session")
def scorer_manifest():
    return {
        "schema_version": 1,
        "topics": TOPIC_DOCS,
        "malicious": MALICIOUS_DOCS,
        "benign": BENIGN_DOCS,
    }
