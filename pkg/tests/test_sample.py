import math

import numpy as np
import pytest

from pairrank import (
    ComparisonRecord,
    draw_observations,
    gen_parametric,
    gen_planted,
    ingest_comparisons,
    make_matrix,
    read_comparisons_csv,
    read_observations_csv,
    subsample,
    write_comparisons_csv,
    write_observations_csv,
)


def certain_matrix():
    # item 0 always beats item 1, item 2 is a coin flip against both
    return make_matrix(
        [
            [0.5, 1.0, 0.5],
            [0.0, 0.5, 0.5],
            [0.5, 0.5, 0.5],
        ]
    )


class TestDrawObservations:
    def test_p_one_gives_exactly_r_everywhere(self):
        m = gen_planted(10, 3, 0.2)
        obs = draw_observations(m, 1.0, 17, seed=4)
        iu, ju = np.triu_indices(10, 1)
        assert np.all(obs.comparisons[iu, ju] == 17)

    def test_certain_winner_takes_all(self):
        obs = draw_observations(certain_matrix(), 1.0, 50, seed=9)
        assert obs.wins[0, 1] == obs.comparisons[0, 1] == 50
        assert obs.wins[1, 0] == 0

    def test_win_split_consistency(self):
        m = gen_parametric(np.linspace(1, -1, 8), "logistic")
        obs = draw_observations(m, 0.7, 25, seed=1)
        assert np.array_equal(obs.wins + obs.wins.T, obs.comparisons)
        assert np.array_equal(obs.comparisons, obs.comparisons.T)
        assert np.all(obs.comparisons <= 25)
        assert np.all(np.diagonal(obs.comparisons) == 0)

    def test_deterministic(self):
        m = gen_planted(12, 4, 0.3)
        a = draw_observations(m, 0.5, 9, seed=77)
        b = draw_observations(m, 0.5, 9, seed=77)
        assert np.array_equal(a.wins, b.wins)
        assert np.array_equal(a.comparisons, b.comparisons)
        c = draw_observations(m, 0.5, 9, seed=78)
        assert not np.array_equal(a.wins, c.wins)

    def test_mean_comparisons_matches_binomial(self):
        # n=50, p=0.5, r=20: mean count per pair is 10; the pooled mean
        # over 1e4 replications must land within 3 standard errors
        m = gen_planted(50, 10, 0.1)
        reps = 10_000
        iu, ju = np.triu_indices(50, 1)
        total = 0
        for i in range(reps):
            total += int(draw_observations(m, 0.5, 20, seed=i).comparisons[iu, ju].sum())
        samples = reps * iu.size
        mean = total / samples
        se = math.sqrt(20 * 0.5 * 0.5 / samples)
        assert abs(mean - 10.0) <= 3 * se

    def test_empirical_frequency_tracks_matrix(self):
        # r*p = 1e4: every pair's win frequency within 5 binomial sigmas
        m = gen_parametric(np.linspace(0.8, -0.8, 6), "logistic")
        iu, ju = np.triu_indices(6, 1)
        probs = m.entries[iu, ju]
        for seed in (0, 1, 2):
            obs = draw_observations(m, 1.0, 10_000, seed=seed)
            freq = obs.wins[iu, ju] / obs.comparisons[iu, ju]
            bound = 5 * np.sqrt(probs * (1 - probs) / obs.comparisons[iu, ju])
            assert np.all(np.abs(freq - probs) <= bound)

    def test_parameter_validation(self):
        m = gen_planted(5, 2, 0.1)
        with pytest.raises(ValueError):
            draw_observations(m, 0.0, 5, seed=0)
        with pytest.raises(ValueError):
            draw_observations(m, 0.5, 0, seed=0)
        with pytest.raises(ValueError):
            draw_observations(m, 0.5, 5, seed=-1)


class TestSubsample:
    def test_q_one_is_identity(self):
        m = gen_planted(8, 2, 0.2)
        obs = draw_observations(m, 0.8, 12, seed=3)
        thin = subsample(obs, 1.0, seed=5)
        assert np.array_equal(thin.wins, obs.wins)
        assert np.array_equal(thin.comparisons, obs.comparisons)
        assert thin.p == obs.p

    def test_q_zero_empties_everything(self):
        m = gen_planted(8, 2, 0.2)
        obs = draw_observations(m, 0.8, 12, seed=3)
        thin = subsample(obs, 0.0, seed=5)
        assert thin.comparisons.sum() == 0
        assert thin.wins.sum() == 0

    def test_half_thinning_total(self):
        # ~1e4 comparisons thinned at q = 1/2: retained total within 3
        # standard errors of one half
        m = gen_planted(46, 10, 0.1)
        obs = draw_observations(m, 1.0, 10, seed=21)
        total = obs.total_comparisons()
        assert total == math.comb(46, 2) * 10
        thin = subsample(obs, 0.5, seed=22)
        se = math.sqrt(total * 0.25)
        assert abs(thin.total_comparisons() - total / 2) <= 3 * se

    def test_matches_fresh_draw_distribution(self):
        # thinning a (p, r) draw matches a (p*q, r) draw: chi-square on
        # the per-pair count histogram over 1e4 replications, 1% level
        from scipy.stats import chi2

        m = gen_planted(4, 1, 0.2)
        p, q, r, reps = 0.6, 0.5, 8, 10_000
        thinned = np.empty(reps, dtype=np.int64)
        fresh = np.empty(reps, dtype=np.int64)
        for i in range(reps):
            obs = draw_observations(m, p, r, seed=i)
            thinned[i] = subsample(obs, q, seed=reps + i).comparisons[0, 1]
            fresh[i] = draw_observations(m, p * q, r, seed=2 * reps + i).comparisons[0, 1]
        table = np.zeros((2, r + 1))
        for row, data in enumerate((thinned, fresh)):
            for value in data:
                table[row, value] += 1
        keep = table.sum(axis=0) >= 10
        pooled = table[:, ~keep].sum(axis=1)
        table = table[:, keep]
        if pooled.sum() > 0:
            table = np.column_stack([table, pooled])
        col = table.sum(axis=0)
        row = table.sum(axis=1)
        expected = np.outer(row, col) / table.sum()
        stat = ((table - expected) ** 2 / expected).sum()
        dof = table.shape[1] - 1
        assert stat <= chi2.ppf(0.99, dof)

    def test_deterministic(self):
        obs = draw_observations(gen_planted(10, 3, 0.2), 1.0, 20, seed=8)
        a = subsample(obs, 0.3, seed=1)
        b = subsample(obs, 0.3, seed=1)
        assert np.array_equal(a.wins, b.wins)

    def test_p_metadata_scales(self):
        obs = draw_observations(gen_planted(6, 2, 0.2), 0.8, 10, seed=0)
        assert subsample(obs, 0.5, seed=1).p == pytest.approx(0.4)

    def test_q_validated(self):
        obs = draw_observations(gen_planted(6, 2, 0.2), 0.8, 10, seed=0)
        with pytest.raises(ValueError):
            subsample(obs, 1.5, seed=0)


class TestIngest:
    def test_counts_example(self):
        obs, index = ingest_comparisons(
            [("A", "B", "A"), ("A", "B", "B"), ("A", "B", "A")]
        )
        assert index == {"A": 0, "B": 1}
        assert obs.comparisons[0, 1] == 3
        assert obs.wins[0, 1] == 2
        assert obs.wins[1, 0] == 1
        assert obs.r == 3
        assert obs.p is None

    def test_first_appearance_indexing(self):
        obs, index = ingest_comparisons(
            [("C", "A", "A"), ("B", "C", "B"), ("A", "B", "B")]
        )
        assert index == {"C": 0, "A": 1, "B": 2}
        assert obs.n == 3

    def test_self_comparison_rejected(self):
        with pytest.raises(ValueError, match="self-comparison"):
            ingest_comparisons([("A", "A", "A")])

    def test_foreign_winner_rejected(self):
        with pytest.raises(ValueError, match="winner"):
            ingest_comparisons([("A", "B", "C")])

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="no comparison records"):
            ingest_comparisons([])


class TestComparisonsCsv:
    def test_round_trip(self, tmp_path):
        records = [
            ComparisonRecord("x", "y", "x"),
            ComparisonRecord("y", "z", "z"),
            ComparisonRecord("x", "z", "x"),
        ]
        path = tmp_path / "comparisons.csv"
        write_comparisons_csv(records, path)
        assert read_comparisons_csv(path) == records

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,w\nx,y,x\n")
        with pytest.raises(ValueError, match="header"):
            read_comparisons_csv(path)


class TestObservationsCsv:
    def test_round_trip(self, tmp_path):
        obs = draw_observations(gen_planted(9, 3, 0.25), 0.5, 7, seed=13)
        path = tmp_path / "obs.csv"
        write_observations_csv(obs, path)
        back = read_observations_csv(path)
        assert back.n == obs.n and back.r == obs.r and back.p == obs.p
        assert np.array_equal(back.comparisons, obs.comparisons)
        assert np.array_equal(back.wins, obs.wins)

    def test_unknown_p_round_trips(self, tmp_path):
        obs, _ = ingest_comparisons([("a", "b", "a"), ("b", "c", "c")])
        path = tmp_path / "obs.csv"
        write_observations_csv(obs, path)
        assert read_observations_csv(path).p is None

    def test_metadata_line_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("i,j,comparisons,wins_i\n0,1,3,2\n")
        with pytest.raises(ValueError, match="metadata"):
            read_observations_csv(path)
