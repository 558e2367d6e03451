"""Exact all-in equity against one uniformly random hand, by enumeration.

Cards are dense indices ``(rank - 2) * 4 + suit``.  Scores produced by
:func:`score7` order hands exactly like :meth:`HandValue.score`.
"""

from __future__ import annotations

from itertools import permutations

import numpy as np
from numba import njit

from ..engine.cards import Card, RANK_CHARS

_SUIT_PERMS = np.array(list(permutations(range(4))), dtype=np.int64)


@njit(cache=True)
def _straight_top(mask):
    if mask & (1 << 14):
        mask |= 1 << 1
    for top in range(14, 4, -1):
        window = 0b11111 << (top - 4)
        if mask & window == window:
            return top
    return 0


@njit(cache=True)
def _pack(category, t0, t1, t2, t3, t4):
    return ((((category * 16 + t0) * 16 + t1) * 16 + t2) * 16 + t3) * 16 + t4


@njit(cache=True)
def _top_bits(mask, k):
    """Pack the highest ``k`` set rank bits of ``mask`` (base 16, padded to 5)."""
    out = 0
    taken = 0
    for r in range(14, 1, -1):
        if taken < k and mask & (1 << r):
            out = out * 16 + r
            taken += 1
    for _ in range(taken, 5):
        out *= 16
    return out


@njit(cache=True)
def score_cards(cards, n):
    """Score of the best five-card hand among ``cards[:n]`` (5 <= n <= 7)."""
    m0 = 0
    m1 = 0
    m2 = 0
    m3 = 0
    for i in range(n):
        bit = 1 << (cards[i] // 4 + 2)
        s = cards[i] % 4
        if s == 0:
            m0 |= bit
        elif s == 1:
            m1 |= bit
        elif s == 2:
            m2 |= bit
        else:
            m3 |= bit
    flush_mask = 0
    for m in (m0, m1, m2, m3):
        c = 0
        x = m
        while x:
            x &= x - 1
            c += 1
        if c >= 5:
            flush_mask = m
    if flush_mask:
        top = _straight_top(flush_mask)
        if top:
            return _pack(8, top, 0, 0, 0, 0)
    rank_mask = m0 | m1 | m2 | m3
    quad = 0
    trip1 = 0
    trip2 = 0
    pair1 = 0
    pair2 = 0
    singles = 0
    for r in range(14, 1, -1):
        c = ((m0 >> r) & 1) + ((m1 >> r) & 1) + ((m2 >> r) & 1) + ((m3 >> r) & 1)
        if c == 4:
            quad = r
        elif c == 3:
            if trip1 == 0:
                trip1 = r
            elif trip2 == 0:
                trip2 = r
        elif c == 2:
            if pair1 == 0:
                pair1 = r
            elif pair2 == 0:
                pair2 = r
        elif c == 1:
            singles |= 1 << r
    if quad:
        return _pack(7, quad, 0, 0, 0, 0) + _top_bits(rank_mask & ~(1 << quad), 1) // 16
    if trip1 and (trip2 or pair1):
        p = trip2 if trip2 > pair1 else pair1
        return _pack(6, trip1, p, 0, 0, 0)
    if flush_mask:
        return 5 * 16 ** 5 + _top_bits(flush_mask, 5)
    top = _straight_top(rank_mask)
    if top:
        return _pack(4, top, 0, 0, 0, 0)
    if trip1:
        return _pack(3, trip1, 0, 0, 0, 0) + _top_bits(singles, 2) // 16
    if pair2:
        kick = rank_mask & ~(1 << pair1) & ~(1 << pair2)
        return _pack(2, pair1, pair2, 0, 0, 0) + _top_bits(kick, 1) // (16 * 16)
    if pair1:
        return _pack(1, pair1, 0, 0, 0, 0) + _top_bits(singles, 3) // 16
    return _top_bits(singles, 5)


@njit(cache=True)
def _class_index(a, b):
    """0..168 index on a 13x13 grid: pairs on the diagonal, suited above, offsuit below."""
    ra = a // 4
    rb = b // 4
    hi = ra if ra > rb else rb
    lo = rb if ra > rb else ra
    if a % 4 == b % 4:
        return (12 - hi) * 13 + (12 - lo)
    return (12 - lo) * 13 + (12 - hi)


@njit(cache=True)
def _board_weight(board, perms):
    """Orbit size of ``board`` under suit permutations, or 0 if not canonical.

    Canonical means lexicographically smallest sorted image.
    """
    fixed = 0
    img = np.zeros(5, np.int64)
    for p in range(perms.shape[0]):
        for i in range(5):
            c = board[i]
            img[i] = (c // 4) * 4 + perms[p, c % 4]
        img.sort()
        cmp = 0
        for i in range(5):
            if img[i] != board[i]:
                cmp = -1 if img[i] < board[i] else 1
                break
        if cmp < 0:
            return 0
        if cmp == 0:
            fixed += 1
    return perms.shape[0] // fixed


@njit(cache=True)
def _preflop_tally(perms):
    wins = np.zeros(169, np.int64)
    ties = np.zeros(169, np.int64)
    totals = np.zeros(169, np.int64)
    board = np.zeros(5, np.int64)
    cards = np.zeros(7, np.int64)
    rest = np.zeros(47, np.int64)
    ha = np.zeros(1081, np.int64)
    hb = np.zeros(1081, np.int64)
    sc = np.zeros(1081, np.int64)
    per_card = np.zeros((52, 46), np.int64)
    per_n = np.zeros(52, np.int64)
    orbit_total = 0
    for b0 in range(52):
        for b1 in range(b0 + 1, 52):
            for b2 in range(b1 + 1, 52):
                for b3 in range(b2 + 1, 52):
                    for b4 in range(b3 + 1, 52):
                        board[0] = b0
                        board[1] = b1
                        board[2] = b2
                        board[3] = b3
                        board[4] = b4
                        w = _board_weight(board, perms)
                        if w == 0:
                            continue
                        orbit_total += w
                        k = 0
                        for c in range(52):
                            if c != b0 and c != b1 and c != b2 and c != b3 and c != b4:
                                rest[k] = c
                                k += 1
                        for i in range(5):
                            cards[i] = board[i]
                        per_n[:] = 0
                        h = 0
                        for i in range(47):
                            for j in range(i + 1, 47):
                                cards[5] = rest[i]
                                cards[6] = rest[j]
                                s = score_cards(cards, 7)
                                ha[h] = rest[i]
                                hb[h] = rest[j]
                                sc[h] = s
                                per_card[rest[i], per_n[rest[i]]] = s
                                per_n[rest[i]] += 1
                                per_card[rest[j], per_n[rest[j]]] = s
                                per_n[rest[j]] += 1
                                h += 1
                        allsorted = np.sort(sc)
                        for i in range(47):
                            c = rest[i]
                            per_card[c, :46] = np.sort(per_card[c, :46])
                        for h in range(1081):
                            s = sc[h]
                            a = ha[h]
                            b = hb[h]
                            less = np.searchsorted(allsorted, s, "left")
                            leq = np.searchsorted(allsorted, s, "right")
                            less -= np.searchsorted(per_card[a, :46], s, "left")
                            less -= np.searchsorted(per_card[b, :46], s, "left")
                            leq -= np.searchsorted(per_card[a, :46], s, "right")
                            leq -= np.searchsorted(per_card[b, :46], s, "right")
                            leq += 1
                            ci = _class_index(a, b)
                            wins[ci] += w * less
                            ties[ci] += w * (leq - less)
                            totals[ci] += w * 990
    return wins, ties, totals, orbit_total


def class_name(index: int) -> str:
    row, col = divmod(index, 13)
    r1, r2 = RANK_CHARS[12 - row], RANK_CHARS[12 - col]
    if row == col:
        return r1 + r2
    if row < col:
        return r1 + r2 + "s"
    return r2 + r1 + "o"


def preflop_equity_table() -> dict[str, tuple[int, int, int]]:
    """Exact (wins, ties, total) per starting-hand class over all deals.

    Sums over every (hero combo, 5-card board, opponent hand) with all nine
    cards distinct; equity is ``(wins + ties / 2) / total``.  Boards are
    enumerated once per suit-permutation orbit and weighted by orbit size.
    """
    wins, ties, totals, orbit_total = _preflop_tally(_SUIT_PERMS)
    if orbit_total != 2_598_960:
        raise AssertionError(f"board orbits cover {orbit_total} boards, expected 2,598,960")
    return {class_name(i): (int(wins[i]), int(ties[i]), int(totals[i])) for i in range(169)}


@njit(cache=True)
def _equity_direct(hero, board, nboard):
    """Reference enumeration: every runout against every opponent hand."""
    used = np.zeros(52, np.bool_)
    used[hero[0]] = True
    used[hero[1]] = True
    for i in range(nboard):
        used[board[i]] = True
    rest = np.zeros(52, np.int64)
    n = 0
    for c in range(52):
        if not used[c]:
            rest[n] = c
            n += 1
    need = 5 - nboard
    hcards = np.zeros(7, np.int64)
    ocards = np.zeros(7, np.int64)
    for i in range(nboard):
        hcards[2 + i] = board[i]
        ocards[2 + i] = board[i]
    hcards[0] = hero[0]
    hcards[1] = hero[1]
    win2 = 0  # twice the equity numerator
    total = 0
    idx = np.zeros(5, np.int64)
    # enumerate runouts as index combinations into rest[:n]
    for k in range(need):
        idx[k] = k
    while True:
        for k in range(need):
            hcards[2 + nboard + k] = rest[idx[k]]
            ocards[2 + nboard + k] = rest[idx[k]]
        hs = score_cards(hcards, 7)
        for i in range(n):
            skip_i = False
            for k in range(need):
                if idx[k] == i:
                    skip_i = True
            if skip_i:
                continue
            for j in range(i + 1, n):
                skip_j = False
                for k in range(need):
                    if idx[k] == j:
                        skip_j = True
                if skip_j:
                    continue
                ocards[0] = rest[i]
                ocards[1] = rest[j]
                os_ = score_cards(ocards, 7)
                if hs > os_:
                    win2 += 2
                elif hs == os_:
                    win2 += 1
                total += 2
        if need == 0:
            break
        # advance combination
        k = need - 1
        while k >= 0 and idx[k] == n - need + k:
            k -= 1
        if k < 0:
            break
        idx[k] += 1
        for m in range(k + 1, need):
            idx[m] = idx[m - 1] + 1
    return win2, total


@njit(cache=True)
def _rank_score(counts):
    """Score ignoring suits (no flushes) from per-rank counts indexed 2..14."""
    quad = 0
    trip1 = 0
    trip2 = 0
    pair1 = 0
    pair2 = 0
    singles = 0
    rank_mask = 0
    for r in range(14, 1, -1):
        c = counts[r]
        if c:
            rank_mask |= 1 << r
        if c == 4:
            quad = r
        elif c == 3:
            if trip1 == 0:
                trip1 = r
            elif trip2 == 0:
                trip2 = r
        elif c == 2:
            if pair1 == 0:
                pair1 = r
            elif pair2 == 0:
                pair2 = r
        elif c == 1:
            singles |= 1 << r
    if quad:
        return _pack(7, quad, 0, 0, 0, 0) + _top_bits(rank_mask & ~(1 << quad), 1) // 16
    if trip1 and (trip2 or pair1):
        p = trip2 if trip2 > pair1 else pair1
        return _pack(6, trip1, p, 0, 0, 0)
    top = _straight_top(rank_mask)
    if top:
        return _pack(4, top, 0, 0, 0, 0)
    if trip1:
        return _pack(3, trip1, 0, 0, 0, 0) + _top_bits(singles, 2) // 16
    if pair2:
        kick = rank_mask & ~(1 << pair1) & ~(1 << pair2)
        return _pack(2, pair1, pair2, 0, 0, 0) + _top_bits(kick, 1) // (16 * 16)
    if pair1:
        return _pack(1, pair1, 0, 0, 0, 0) + _top_bits(singles, 3) // 16
    return _top_bits(singles, 5)


@njit(cache=True)
def _equity_vs_random(hero, board, nboard):
    """Same result as :func:`_equity_direct`, much faster.

    For each completed board, hands that cannot make a flush are scored
    from ranks alone, so each rank pair is evaluated once; only opponent
    hands holding a card of a suit with three or more on the board are
    scored in full (all of them when the board itself is a flush).
    """
    used = np.zeros(52, np.bool_)
    used[hero[0]] = True
    used[hero[1]] = True
    for i in range(nboard):
        used[board[i]] = True
    rest = np.zeros(52, np.int64)
    n = 0
    for c in range(52):
        if not used[c]:
            rest[n] = c
            n += 1
    need = 5 - nboard
    full = np.zeros(7, np.int64)
    hcards = np.zeros(7, np.int64)
    for i in range(nboard):
        full[2 + i] = board[i]
    hcards[0] = hero[0]
    hcards[1] = hero[1]
    counts = np.zeros(15, np.int64)
    table = np.zeros((15, 15), np.int64)
    in_run = np.zeros(52, np.bool_)
    suit_n = np.zeros(4, np.int64)
    win2 = 0
    total = 0
    idx = np.zeros(5, np.int64)
    for k in range(need):
        idx[k] = k
    while True:
        for k in range(need):
            full[2 + nboard + k] = rest[idx[k]]
            in_run[rest[idx[k]]] = True
        for k in range(2, 7):
            hcards[k] = full[k]
        hs = score_cards(hcards, 7)
        counts[:] = 0
        suit_n[:] = 0
        for k in range(2, 7):
            counts[full[k] // 4 + 2] += 1
            suit_n[full[k] % 4] += 1
        flush_suit = -1
        board_flush = False
        for q in range(4):
            if suit_n[q] >= 3:
                flush_suit = q
                board_flush = suit_n[q] == 5
        for r1 in range(2, 15):
            for r2 in range(r1, 15):
                counts[r1] += 1
                counts[r2] += 1
                if counts[r1] <= 4 and counts[r2] <= 4:
                    v = _rank_score(counts)
                    table[r1, r2] = v
                    table[r2, r1] = v
                counts[r1] -= 1
                counts[r2] -= 1
        for i in range(n):
            ci = rest[i]
            if in_run[ci]:
                continue
            for j in range(i + 1, n):
                cj = rest[j]
                if in_run[cj]:
                    continue
                if flush_suit >= 0 and (board_flush or ci % 4 == flush_suit or cj % 4 == flush_suit):
                    full[0] = ci
                    full[1] = cj
                    os_ = score_cards(full, 7)
                else:
                    os_ = table[ci // 4 + 2, cj // 4 + 2]
                if hs > os_:
                    win2 += 2
                elif hs == os_:
                    win2 += 1
                total += 2
        for k in range(need):
            in_run[rest[idx[k]]] = False
        if need == 0:
            break
        k = need - 1
        while k >= 0 and idx[k] == n - need + k:
            k -= 1
        if k < 0:
            break
        idx[k] += 1
        for m in range(k + 1, need):
            idx[m] = idx[m - 1] + 1
    return win2, total


def equity_vs_random(hole: list[Card], board: list[Card]) -> float:
    """Exact equity of ``hole`` against one random hand, board completed at random.

    Intended for postflop boards (3-5 cards); preflop equities come from the
    cached ranking table.
    """
    if len(hole) != 2 or len(board) > 5:
        raise ValueError("need 2 hole cards and at most 5 board cards")
    cards = [c.index for c in list(hole) + list(board)]
    if len(set(cards)) != len(cards):
        raise ValueError("duplicate cards")
    hero = np.array(cards[:2], dtype=np.int64)
    b = np.zeros(5, dtype=np.int64)
    b[: len(board)] = cards[2:]
    win2, total = _equity_vs_random(hero, b, len(board))
    return win2 / total


def score_seven(cards: list[Card]) -> int:
    arr = np.array([c.index for c in cards], dtype=np.int64)
    return int(score_cards(arr, len(cards)))
