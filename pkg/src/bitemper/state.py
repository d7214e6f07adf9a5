"""Packed binary state vectors on {0,1}^p."""
from __future__ import annotations

import numpy as np

_WORD_BITS = 64


class BinaryState:
    """A point in {0,1}^p stored as packed 64-bit words.

    Coordinate i lives in word i // 64 at bit i % 64.  Bits past p-1 in the
    last word are kept zero so that equality and hashing can work on the raw
    words.
    """

    __slots__ = ("words", "p")

    def __init__(self, words: np.ndarray, p: int):
        if p < 1:
            raise ValueError("dimension p must be positive")
        n_words = (p + _WORD_BITS - 1) // _WORD_BITS
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (n_words,):
            raise ValueError(f"expected {n_words} words for p={p}")
        self.words = words
        self.p = p
        self._check_padding()

    def _check_padding(self) -> None:
        extra = self.p % _WORD_BITS
        if extra:
            mask = np.uint64((1 << extra) - 1)
            if self.words[-1] & ~mask:
                raise ValueError("nonzero padding bits beyond position p-1")

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, p: int) -> "BinaryState":
        n_words = (p + _WORD_BITS - 1) // _WORD_BITS
        return cls(np.zeros(n_words, dtype=np.uint64), p)

    @classmethod
    def from_array(cls, bits) -> "BinaryState":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.size == 0:
            raise ValueError("bits must be a nonempty 1-d sequence")
        if np.any(bits > 1):
            raise ValueError("bits must be 0 or 1")
        p = bits.size
        s = cls.zeros(p)
        for i in np.flatnonzero(bits):
            s.flip(int(i))
        return s

    @classmethod
    def from_string(cls, text: str) -> "BinaryState":
        """Parse a "0"/"1" string; character k is coordinate k (MSB first)."""
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"not a bit-string: {text!r}")
        return cls.from_array([int(c) for c in text])

    @classmethod
    def from_int(cls, key: int, p: int) -> "BinaryState":
        if key < 0 or key >> p:
            raise ValueError("key out of range for dimension")
        s = cls.zeros(p)
        i = 0
        while key:
            if key & 1:
                s.flip(i)
            key >>= 1
            i += 1
        return s

    # -- mutation and access ------------------------------------------

    def flip(self, i: int) -> None:
        """Toggle coordinate i in place; flipping twice restores the state."""
        if not 0 <= i < self.p:
            raise IndexError(f"bit index {i} out of range for p={self.p}")
        self.words[i // _WORD_BITS] ^= np.uint64(1) << np.uint64(i % _WORD_BITS)

    def get(self, i: int) -> int:
        if not 0 <= i < self.p:
            raise IndexError(f"bit index {i} out of range for p={self.p}")
        return int((self.words[i // _WORD_BITS] >> np.uint64(i % _WORD_BITS)) & np.uint64(1))

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.p, dtype=np.uint8)
        for w, word in enumerate(self.words):
            word = int(word)
            base = w * _WORD_BITS
            while word:
                low = word & -word
                out[base + low.bit_length() - 1] = 1
                word ^= low
        return out

    def to_int(self) -> int:
        """Integer encoding with coordinate 0 as the least significant bit."""
        key = 0
        for w in range(len(self.words) - 1, -1, -1):
            key = (key << _WORD_BITS) | int(self.words[w])
        return key

    def to_string(self) -> str:
        return "".join(str(b) for b in self.to_array())

    def hamming(self, other: "BinaryState") -> int:
        if other.p != self.p:
            raise ValueError("dimension mismatch")
        return int(np.bitwise_count(self.words ^ other.words).sum())

    def copy(self) -> "BinaryState":
        return BinaryState(self.words.copy(), self.p)

    # -- protocol ------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BinaryState)
            and self.p == other.p
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self) -> int:
        return hash((self.p, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BinaryState({self.to_string()!r})"
