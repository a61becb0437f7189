import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sentecon.cognition import (MemoryBank, Persona, SentimentState,
                                adjust_decision, cosine, embed, update_esi,
                                update_persona)


class TestEmbed:
    def test_deterministic(self):
        a = embed("wage cut savings")
        b = embed("wage cut savings")
        assert np.array_equal(a, b)
        assert cosine(a, b) == pytest.approx(1.0)

    def test_unit_norm_or_zero(self):
        assert np.linalg.norm(embed("prices rose sharply")) == pytest.approx(1.0)
        assert np.all(embed("") == 0.0)
        assert np.all(embed("...!!!") == 0.0)

    def test_zero_vector_cosine_is_zero(self):
        assert cosine(embed(""), embed("anything")) == 0.0

    def test_case_and_punctuation_insensitive(self):
        assert np.array_equal(embed("Wage Cut!"), embed("wage cut"))

    def test_dimension(self):
        assert embed("hello", dim=64).shape == (64,)


def fill_bank(texts, capacity=256):
    bank = MemoryBank(capacity=capacity)
    for t, text in enumerate(texts):
        bank.store_event(t, text, esi=0.0)
    return bank


class TestMemoryBank:
    def test_store_grows(self):
        bank = fill_bank(["one event"])
        assert len(bank) == 1

    def test_eviction(self):
        bank = fill_bank([f"event {i}" for i in range(5)], capacity=4)
        assert len(bank) == 4
        assert bank.records[0].timestamp == 1

    def test_stored_embedding_matches(self):
        bank = fill_bank(["a memorable month"])
        assert np.array_equal(bank.records[0].embedding,
                              embed("a memorable month"))

    def test_out_of_order_timestamp_rejected(self):
        bank = fill_bank(["first", "second"])
        with pytest.raises(ValueError):
            bank.store_event(0, "too late", 0.0)

    def test_equal_timestamp_allowed(self):
        bank = MemoryBank()
        bank.store_event(3, "one", 0.0)
        bank.store_event(3, "two", 0.0)
        assert len(bank) == 2

    def test_short_term_ring(self):
        bank = fill_bank([f"month {i}" for i in range(5)])
        assert list(bank.short_term) == ["month 2", "month 3", "month 4"]

    def test_k_zero(self):
        bank = fill_bank(["x", "y"])
        assert bank.retrieve("x", 0) == []

    def test_retrieve_orders_by_similarity(self):
        bank = fill_bank(["rent went up again", "got a pay raise",
                          "bought groceries"])
        got = [r.summary for r in bank.retrieve("pay raise at work", 2)]
        assert got[0] == "got a pay raise"

    def test_tie_broken_by_recency(self):
        bank = fill_bank(["same text", "same text"])
        got = bank.retrieve("same text", 2)
        assert [r.timestamp for r in got] == [1, 0]

    def test_zero_query_returns_most_recent(self):
        bank = fill_bank([f"event number {i}" for i in range(6)])
        got = bank.retrieve("", 3)
        assert [r.timestamp for r in got] == [5, 4, 3]

    def test_matches_bruteforce_oracle(self):
        rng = random.Random(123)
        words = ["wage", "price", "rent", "job", "tax", "food", "loan",
                 "save", "spend", "bank"]
        for _ in range(25):
            n = rng.randint(1, 60)
            texts = [" ".join(rng.choices(words, k=rng.randint(1, 6)))
                     for _ in range(n)]
            bank = fill_bank(texts)
            query = " ".join(rng.choices(words, k=3))
            k = rng.randint(0, 10)
            q = embed(query)
            scored = [(float(np.dot(q, r.embedding)), r.timestamp, r.seq, r)
                      for r in bank.records]
            scored.sort(key=lambda t: (-t[0], -t[1], -t[2]))
            expected = [t[3] for t in scored[:k]]
            assert bank.retrieve(query, k) == expected


class TestUpdateEsi:
    def test_fixed_point(self):
        s = SentimentState(esi=0.5, decay_lambda=0.9)
        assert update_esi(s, 0.5) == pytest.approx(0.5)

    def test_geometric_approach(self):
        s = SentimentState(esi=0.0, decay_lambda=0.9)
        for _ in range(10):
            update_esi(s, 1.0)
        assert s.esi == pytest.approx(1.0 - 0.9 ** 10, abs=1e-9)
        assert s.esi == pytest.approx(0.6513216, abs=1e-6)

    def test_direct_blend(self):
        s = SentimentState(esi=1.0, decay_lambda=0.8)
        assert update_esi(s, -1.0) == pytest.approx(0.6)

    def test_out_of_range_input_clamped(self):
        s = SentimentState(esi=0.0, decay_lambda=0.9)
        assert update_esi(s, 5.0) == pytest.approx(0.1)

    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.8, 0.95))
    @settings(max_examples=300)
    def test_convex_combination(self, prev, new, lam):
        s = SentimentState(esi=prev, decay_lambda=lam)
        out = update_esi(s, new)
        assert min(prev, new) - 1e-12 <= out <= max(prev, new) + 1e-12

    def test_closed_form_random(self):
        rng = random.Random(7)
        for _ in range(100):
            c = rng.uniform(-1, 1)
            lam = rng.uniform(0.8, 0.95)
            n = rng.randint(1, 200)
            s = SentimentState(esi=0.0, decay_lambda=lam)
            for _ in range(n):
                update_esi(s, c)
            assert abs(s.esi - c * (1 - lam ** n)) < 1e-9


def sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


class TestAdjustDecision:
    def test_logit_identity_at_zero_esi(self):
        s = SentimentState(esi=0.0, work_gain=1.0, consume_gain=1.0)
        assert adjust_decision(0.3, 0.7, s, confidence=0.2) == \
            (pytest.approx(0.3), pytest.approx(0.7))

    def test_logit_shift_value(self):
        s = SentimentState(esi=-0.5, work_gain=1.0, consume_gain=1.0)
        pw, _ = adjust_decision(0.5, 0.5, s, confidence=0.2)
        assert pw == pytest.approx(sigmoid(0.5), abs=1e-9)
        assert pw == pytest.approx(0.6224593, abs=1e-6)

    def test_gate_open_is_identity(self):
        s = SentimentState(esi=-0.5, work_gain=1.0, consume_gain=1.0)
        assert adjust_decision(0.5, 0.5, s, confidence=0.9) == (0.5, 0.5)

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99),
           st.floats(-1, -0.01) | st.floats(0.01, 1),
           st.floats(0.05, 3), st.floats(0.05, 3),
           st.sampled_from(["logit", "literal"]))
    @settings(max_examples=500)
    def test_direction(self, pw, pc, esi, theta, beta, mode):
        neutral = SentimentState(esi=0.0, work_gain=theta, consume_gain=beta,
                                 adjust_mode=mode)
        shifted = SentimentState(esi=esi, work_gain=theta, consume_gain=beta,
                                 adjust_mode=mode)
        pw0, pc0 = adjust_decision(pw, pc, neutral, confidence=0.1)
        pw1, pc1 = adjust_decision(pw, pc, shifted, confidence=0.1)
        if esi < 0:
            assert pw1 > pw0 and pc1 < pc0
        else:
            assert pw1 < pw0 and pc1 > pc0

    def test_boundary_probabilities_survive_logit(self):
        s = SentimentState(esi=-0.5, work_gain=1.0, consume_gain=1.0)
        pw, pc = adjust_decision(0.0, 1.0, s, confidence=0.1)
        assert 0.0 < pw < 1.0 and 0.0 < pc < 1.0


class TestPersona:
    def test_identity_fields_validated(self):
        with pytest.raises(ValueError):
            Persona(name="", age=30, occupation="clerk")
        with pytest.raises(ValueError):
            Persona(name="Ada", age=17, occupation="clerk")

    def test_fallback_no_observation(self):
        p = Persona(name="Ada", age=30, occupation="clerk", traits="steady")
        assert update_persona(p, "") is p

    def test_fallback_appends_and_truncates(self):
        p = Persona(name="Ada", age=30, occupation="clerk", traits="x" * 600)
        out = update_persona(p, "lost job in month 14")
        assert "lost job in month 14" in out.traits
        assert len(out.traits) <= 512

    def test_identity_immutable_under_update(self):
        p = Persona(name="Ada", age=30, occupation="clerk")
        out = update_persona(p, "new fact")
        assert (out.name, out.age, out.occupation) == ("Ada", 30, "clerk")

    def test_backend_failure_keeps_persona(self):
        class Broken:
            def summarize_persona(self, persona, obs):
                raise RuntimeError("down")

        p = Persona(name="Ada", age=30, occupation="clerk", traits="old")
        assert update_persona(p, "obs", Broken()).traits == "old"
