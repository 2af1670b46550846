import contextlib
import http.client
import io
import json
import threading
import urllib.error
import urllib.request

import pytest
from conftest import noise_clip

from coughseg.audio import write_wav
from coughseg.cli import main
from coughseg.errors import AnnotationError, CoughsegError
from coughseg.server import AnnotationServer, _read_label_log


@pytest.fixture
def corpus(tmp_path):
    """A segmented corpus: manifest.json + per-segment WAVs in seg/."""
    src = tmp_path / "in"
    src.mkdir()
    for i in range(3):
        clip = noise_clip(
            2.5, bursts=[(0.8, 0.4, 0.8)], seed=70 + i, source_id=f"take-{i}"
        )
        write_wav(clip, src / f"take-{i}.wav")
    with contextlib.redirect_stderr(io.StringIO()):
        assert main(["segment", str(src), "-o", str(tmp_path / "seg")]) == 0
    return tmp_path / "seg"


def make_server(corpus, tmp_path, **kwargs):
    return AnnotationServer(
        manifest_path=corpus / "manifest.json",
        segments_dir=corpus,
        annotations_path=tmp_path / "labels.csv",
        **kwargs,
    )


@pytest.fixture
def live(corpus, tmp_path):
    server = make_server(corpus, tmp_path)
    server.start(0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server, f"http://127.0.0.1:{server.port}"
    server.shutdown()
    thread.join(timeout=5)


def get_json(base, path):
    with urllib.request.urlopen(base + path) as resp:
        return resp.status, json.loads(resp.read())


def post_label(base, payload):
    req = urllib.request.Request(
        base + "/api/labels",
        data=json.dumps(payload).encode() if not isinstance(payload, bytes) else payload,
        headers={"Content-Type": "application/json"},
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, b""
    except urllib.error.HTTPError as err:
        return err.code, err.read()


# --- transport-free logic ----------------------------------------------------


def test_cards_precomputed_with_peaks(corpus, tmp_path):
    server = make_server(corpus, tmp_path)
    assert len(server.item_order) == 3
    for name in server.item_order:
        card = server.cards[name]
        assert card["segment_file"] == name
        assert card["duration_ms"] > 0
        assert 0 < len(card["peaks"]) <= 2000


def test_startup_rejects_missing_segment_file(corpus, tmp_path):
    (corpus / "take-0_hysteresis_000.wav").unlink()
    with pytest.raises(CoughsegError, match="missing file"):
        make_server(corpus, tmp_path)


def test_segments_payload_merges_rater_labels(corpus, tmp_path):
    server = make_server(corpus, tmp_path)
    first = server.item_order[0]
    assert all(c["label"] is None for c in server.segments_payload(None))
    server.state.record(first, "r9", 1)
    cards = server.segments_payload("r9")
    assert cards[0]["label"] == 1
    assert all(c["label"] is None for c in cards[1:])
    # an unknown rater sees a clean sheet
    assert all(c["label"] is None for c in server.segments_payload("other"))


def test_submit_label_validation(corpus, tmp_path):
    server = make_server(corpus, tmp_path)
    known = server.item_order[0]
    ok = {"segment_file": known, "rater_id": "r1", "label": 1}
    assert server.submit_label(ok) == (204, "")
    cases = [
        ({**ok, "segment_file": "ghost.wav"}, "unknown segment_file"),
        ({**ok, "rater_id": ""}, "rater_id"),
        ({**ok, "rater_id": 5}, "rater_id"),
        ({**ok, "label": 2}, "label"),
        ({**ok, "label": "1"}, "label"),
        ({**ok, "label": True}, "label"),
        ({"rater_id": "r1", "label": 0}, "unknown segment_file"),
        ("not a dict", "JSON object"),
        ({**ok, "rater_id": "bad rater"}, "charset"),
    ]
    for payload, needle in cases:
        status, message = server.submit_label(payload)
        assert status == 400, payload
        assert needle in message


def test_pinned_rater_rejects_others(corpus, tmp_path):
    server = make_server(corpus, tmp_path, rater_id="alice")
    known = server.item_order[0]
    status, msg = server.submit_label(
        {"segment_file": known, "rater_id": "bob", "label": 0}
    )
    assert status == 400 and "pinned" in msg
    assert server.submit_label(
        {"segment_file": known, "rater_id": "alice", "label": 0}
    ) == (204, "")
    # pinned id also resolves labels for GET without a query parameter
    assert server.segments_payload(None)[0]["label"] == 0


def test_export_rewrites_log_deduplicated(corpus, tmp_path):
    server = make_server(corpus, tmp_path)
    a, b = server.item_order[0], server.item_order[1]
    server.state.record(b, "r1", 1)
    server.state.record(a, "r1", 0)
    server.state.record(b, "r1", 0)  # relabel: last write wins
    body = server.export_csv()
    assert body.splitlines() == [
        "segment_file,rater_id,label",
        f"{a},r1,0",
        f"{b},r1,0",
    ]
    # the on-disk log is rewritten in the same deduplicated form
    assert (tmp_path / "labels.csv").read_text() == body


def test_export_keeps_rows_from_other_manifests(corpus, tmp_path):
    # one label log can be shared by several served manifests (one per
    # method); exporting from one session must not drop the others' rows
    log = tmp_path / "labels.csv"
    log.write_text(
        "segment_file,rater_id,label\nelsewhere_rms_threshold_000.wav,r1,1\n"
    )
    server = make_server(corpus, tmp_path)
    mine = server.item_order[0]
    server.state.record(mine, "r1", 0)
    lines = server.export_csv().splitlines()
    assert f"{mine},r1,0" in lines
    assert "elsewhere_rms_threshold_000.wav,r1,1" in lines
    # this manifest's rows sort first, foreign ones after
    assert lines.index(f"{mine},r1,0") < lines.index(
        "elsewhere_rms_threshold_000.wav,r1,1"
    )


def test_state_reloads_existing_log(corpus, tmp_path):
    log = tmp_path / "labels.csv"
    first = make_server(corpus, tmp_path)
    name = first.item_order[0]
    first.state.record(name, "r1", 1)
    first.state.record(name, "r1", 0)
    again = make_server(corpus, tmp_path)
    assert again.state.labels[(name, "r1")] == 0
    assert log.exists()


def test_read_label_log_rejects_malformed(tmp_path):
    log = tmp_path / "labels.csv"
    log.write_text("segment_file,rater_id,label\na.wav,r1,banana\n")
    with pytest.raises(AnnotationError, match="malformed"):
        _read_label_log(log)
    log.write_text("wrong,header,here\n")
    with pytest.raises(AnnotationError, match="header"):
        _read_label_log(log)


def test_shuffle_seed_is_deterministic(corpus, tmp_path):
    plain = make_server(corpus, tmp_path)
    s1 = make_server(corpus, tmp_path, shuffle_seed=99)
    s2 = make_server(corpus, tmp_path, shuffle_seed=99)
    assert s1.item_order == s2.item_order
    assert sorted(s1.item_order) == sorted(plain.item_order)


# --- live HTTP ----------------------------------------------------------------


def test_http_session_and_segments(live):
    _, base = live
    status, session = get_json(base, "/api/session")
    assert status == 200
    assert session["total"] == 3
    status, cards = get_json(base, "/api/segments")
    assert status == 200
    assert [c["segment_file"] for c in cards] == sorted(c["segment_file"] for c in cards)
    assert all(c["label"] is None for c in cards)


def test_http_label_round_trip(live):
    server, base = live
    name = server.item_order[0]
    status, _ = post_label(base, {"segment_file": name, "rater_id": "web1", "label": 1})
    assert status == 204
    status, cards = get_json(base, "/api/segments?rater_id=web1")
    assert cards[0]["label"] == 1
    with urllib.request.urlopen(base + "/api/export.csv") as resp:
        assert resp.status == 200
        assert f"{name},web1,1" in resp.read().decode()


def test_http_label_errors(live):
    server, base = live
    status, body = post_label(
        base, {"segment_file": "ghost.wav", "rater_id": "r", "label": 1}
    )
    assert status == 400
    assert b"unknown segment_file" in body
    status, body = post_label(base, b"{not json")
    assert status == 400
    assert b"valid JSON" in body


def test_http_audio_bytes(live):
    server, base = live
    name = server.item_order[0]
    with urllib.request.urlopen(f"{base}/api/audio/{name}") as resp:
        assert resp.status == 200
        assert resp.headers["Content-Type"] == "audio/wav"
        assert resp.read()[:4] == b"RIFF"
    with pytest.raises(urllib.error.HTTPError) as err:
        urllib.request.urlopen(f"{base}/api/audio/ghost.wav")
    assert err.value.code == 404


def test_http_unknown_api_and_placeholder(live):
    _, base = live
    with pytest.raises(urllib.error.HTTPError) as err:
        urllib.request.urlopen(base + "/api/bogus")
    assert err.value.code == 404
    with urllib.request.urlopen(base + "/") as resp:
        page = resp.read().decode()
    assert "annotation server" in page
    assert "--ui-dir" in page


def test_http_serves_ui_dir_with_content_types(corpus, tmp_path):
    ui = tmp_path / "dist"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>ui</title>")
    (ui / "app.js").write_text("export {};")
    server = make_server(corpus, tmp_path, ui_dir=ui)
    server.start(0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.port}"
    try:
        with urllib.request.urlopen(base + "/") as resp:
            assert "ui" in resp.read().decode()
            assert resp.headers["Content-Type"].startswith("text/html")
        with urllib.request.urlopen(base + "/app.js") as resp:
            assert resp.headers["Content-Type"].startswith("application/javascript")
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(base + "/missing.css")
        assert err.value.code == 404

        # a literal traversal path must not escape the UI directory
        secret = tmp_path / "secret.txt"
        secret.write_text("on-disk, off-limits")
        conn = http.client.HTTPConnection("127.0.0.1", server.port)
        conn.request("GET", "/../secret.txt")
        resp = conn.getresponse()
        assert resp.status == 404
        conn.close()
    finally:
        server.shutdown()
        thread.join(timeout=5)
