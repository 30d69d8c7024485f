from blinker import NamedSignal

from broadband_fit import events


def test_signals_are_named():
    assert isinstance(events.checkpoint_recorded, NamedSignal)
    assert events.checkpoint_recorded.name == "checkpoint-recorded"
    assert events.fit_completed.name == "fit-completed"


def test_fit_completed_delivers_keyword_payload():
    received = []

    def receiver(sender, **kwargs):
        received.append((sender, kwargs))

    with events.fit_completed.connected_to(receiver):
        events.fit_completed.send("vanilla", result="r", run_dir="d")

    assert received == [("vanilla", {"result": "r", "run_dir": "d"})]
