import json
import shutil
import subprocess

import pytest

CORE_CLI = shutil.which("noiseshield")

pytestmark = pytest.mark.skipif(CORE_CLI is None, reason="core CLI not installed")


def run_core(*argv: str) -> dict:
    """Invoke the core CLI; the file formats and JSON outputs are the only
    contract the adapter relies on."""
    proc = subprocess.run(
        [CORE_CLI, *argv], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


@pytest.fixture(scope="session")
def core_artifacts(tmp_path_factory):
    """A key plus embedded noise/payload produced entirely by the core CLI."""
    if CORE_CLI is None:
        pytest.skip("core CLI not installed")
    root = tmp_path_factory.mktemp("core")
    key = root / "key.json"
    run_core("keygen", "--out", str(key))
    embed_dir = root / "embed"
    run_core(
        "embed", "--key", str(key), "--shape", "16,4,32,32",
        "--factors", "8,1,4,4", "--seed", "11", "--out", str(embed_dir),
    )
    return {
        "root": root,
        "key": key,
        "noise": embed_dir / "noise.vslt",
        "payload": embed_dir / "payload.vsbt",
    }
