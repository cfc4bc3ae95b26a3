# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: n-gram hashing and lexicon scanning."""

from cpython.mem cimport PyMem_Malloc, PyMem_Free
from libc.stdint cimport uint32_t, uint8_t

cdef enum:
    TRIGGER = 1
    OFFENSIVE = 2
    HATEFUL = 4


cdef inline uint32_t _rotl(uint32_t x, int r) nogil:
    return (x << r) | (x >> (32 - r))


cdef uint32_t _murmur(const uint8_t* data, Py_ssize_t n, uint32_t seed) nogil:
    cdef uint32_t h = seed
    cdef uint32_t k
    cdef uint32_t c1 = 0xCC9E2D51
    cdef uint32_t c2 = 0x1B873593
    cdef uint32_t c3 = 0xE6546B64
    cdef uint32_t f1 = 0x85EBCA6B
    cdef uint32_t f2 = 0xC2B2AE35
    cdef Py_ssize_t nblocks = n // 4
    cdef Py_ssize_t i
    cdef const uint8_t* tail
    for i in range(nblocks):
        k = (<uint32_t>data[4 * i] | (<uint32_t>data[4 * i + 1] << 8)
             | (<uint32_t>data[4 * i + 2] << 16) | (<uint32_t>data[4 * i + 3] << 24))
        k *= c1
        k = _rotl(k, 15)
        k *= c2
        h ^= k
        h = _rotl(h, 13)
        h = h * 5 + c3
    tail = data + nblocks * 4
    k = 0
    if n & 3 == 3:
        k ^= <uint32_t>tail[2] << 16
    if n & 3 >= 2:
        k ^= <uint32_t>tail[1] << 8
    if n & 3 >= 1:
        k ^= tail[0]
        k *= c1
        k = _rotl(k, 15)
        k *= c2
        h ^= k
    h ^= <uint32_t>n
    h ^= h >> 16
    h *= f1
    h ^= h >> 13
    h *= f2
    h ^= h >> 16
    return h


def murmur3_32(bytes data, long long seed=0):
    """MurmurHash3 x86_32 of ``data``, as an unsigned 32-bit int."""
    return _murmur(<const uint8_t*>data, len(data), <uint32_t>(seed & 0xFFFFFFFF))


def hash_ngrams(str text, tuple orders, long long dim, long long seed):
    cdef dict counts = {}
    cdef bytes raw
    cdef const uint8_t* buf
    cdef Py_ssize_t nbytes, ncp, i, j, n
    cdef uint32_t useed = <uint32_t>(seed & 0xFFFFFFFF)
    cdef unsigned long long udim = <unsigned long long>dim
    cdef object bucket
    cdef Py_ssize_t* starts
    cdef str word
    for word in text.split():
        raw = ("<" + word + ">").encode("utf-8")
        buf = <const uint8_t*>raw
        nbytes = len(raw)
        starts = <Py_ssize_t*>PyMem_Malloc((nbytes + 1) * sizeof(Py_ssize_t))
        if starts == NULL:
            raise MemoryError()
        try:
            # code point start offsets, plus end sentinel
            ncp = 0
            for i in range(nbytes):
                if (buf[i] & 0xC0) != 0x80:
                    starts[ncp] = i
                    ncp += 1
            starts[ncp] = nbytes
            for n in orders:
                for i in range(ncp - n + 1):
                    j = starts[i]
                    bucket = <long long>(_murmur(buf + j, starts[i + n] - j, useed) % udim)
                    counts[bucket] = counts.get(bucket, 0) + 1
        finally:
            PyMem_Free(starts)
    return counts


def scan_tokens(list tokens, dict table):
    cdef bint trigger = False
    cdef list off = []
    cdef list hs = []
    cdef set seen = set()
    cdef object m
    cdef long mask
    for tok in tokens:
        m = table.get(tok)
        if m is None:
            continue
        mask = m
        if mask & TRIGGER:
            trigger = True
        if tok in seen:
            continue
        seen.add(tok)
        if mask & OFFENSIVE:
            off.append(tok)
        if mask & HATEFUL:
            hs.append(tok)
    return trigger, off, hs
