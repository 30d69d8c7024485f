import hashlib

PARTS = ("re", "im")


def derive_seed(base_seed: int, method: str, index: int, part: str) -> int:
    """
    Stable 64-bit seed for one network of a fit.

    The seed depends only on (base_seed, method, index, part), hashed with
    BLAKE2b, so it is the same on every platform and in every process.
    """
    key = f"{int(base_seed)}/{method}/{int(index)}/{part}".encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return int.from_bytes(digest, "little")
