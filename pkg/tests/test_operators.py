import math
import warnings

import numpy as np
import pytest
import scipy.linalg

from fastrip import rng
from fastrip.chaos import alpha_samples
from fastrip.errors import (
    BadSupport,
    BaseNotScaledOrthonormal,
    ConfigParse,
    FieldMismatch,
    KappaTooLarge,
    LengthMismatch,
    RegimeViolation,
    SizeGuard,
)
from fastrip.operators import (
    ChainSpec,
    Construction,
    RegimeWarning,
    SupportSet,
    apply_chain,
    bootstrap_rounds,
    build_theorem1,
    build_theorem2,
    draw_sign_vector,
    gaussian_baseline,
    materialize_chain,
    plan_theorem2,
)
from fastrip.transforms import FastTransformSpec

WHT16 = FastTransformSpec("wht", 16)


def random_unit_sparse(rng_, count, n, s):
    x = np.zeros((count, n))
    for row in x:
        idx = rng_.choice(n, size=s, replace=False)
        row[idx] = rng_.standard_normal(s)
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def theorem2_chain(n, k, kappa=0.25, seed=0, omega=None, H=None):
    H = H or FastTransformSpec("wht", n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        plan = plan_theorem2(n, k, 2, 1.0, H, seed, kappa_override=kappa, strict=False)
    return build_theorem2(plan, omega or SupportSet.first_k(n, k), H)


class TestTheoremOne:
    def test_all_ones_signs_reduce_to_subsampled_transform(self):
        n, k = 16, 4
        omega = SupportSet.first_k(n, k)
        chain = build_theorem1(n, k, omega, 0, 0, WHT16, signs=(np.ones(n), np.ones(n)))
        oracle = math.sqrt(n / k) * (scipy.linalg.hadamard(n) / 4)[:k]
        assert np.max(np.abs(materialize_chain(chain) - oracle)) <= 1e-10

    def test_stage_order(self):
        chain = build_theorem1(16, 4, SupportSet.first_k(16, 4), 1, 2, WHT16)
        names = [type(st).__name__ for st in chain.stages]
        assert names == ["Transform", "SignDiag", "Transform", "SignDiag", "Transform", "Subsample"]
        # D_eps' acts first, D_eps second
        assert chain.stages[1].signs.seed == 2
        assert chain.stages[3].signs.seed == 1
        assert chain.scale == 2.0
        assert chain.transform_count == 3

    def test_energy_on_average(self):
        n, k, trials = 16, 4, 10_000
        chain = ChainSpec(n=n, k=k, seed=3).build()
        x = random_unit_sparse(np.random.default_rng(0), trials, n, n)
        sq = alpha_samples(chain, x, np.arange(trials), seed=11) ** 2
        assert abs(sq.mean() - 1) <= 0.03

    def test_full_sampling_is_isometry(self):
        chain = build_theorem1(8, 8, SupportSet.first_k(8, 8), 5, 6, FastTransformSpec("wht", 8))
        x = np.random.default_rng(1).standard_normal((50, 8))
        assert np.allclose(np.linalg.norm(apply_chain(chain, x), axis=1),
                           np.linalg.norm(x, axis=1), rtol=1e-12)
        M = materialize_chain(chain)
        assert np.max(np.abs(M @ M.T - np.eye(8))) <= 1e-10

    def test_bad_support(self):
        with pytest.raises(BadSupport):
            build_theorem1(16, 4, SupportSet.first_k(16, 3), 0, 1, WHT16)

    def test_transform_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            build_theorem1(32, 4, SupportSet.first_k(32, 4), 0, 1, WHT16)


class TestPlan:
    def test_override_kappa(self):
        plan = plan_theorem2(4096, 64, 1, 1.0, FastTransformSpec("wht", 4096), 0,
                             kappa_override=0.25, strict=False)
        assert plan.r == 2
        assert plan.blocks == 3
        assert len(plan.seeds) == 6

    def test_c_kappa_reaching_quarter(self):
        n, k = 4096, 64
        C = 0.25 / math.sqrt(k * math.log(n) / n)
        plan = plan_theorem2(n, k, 1, C, FastTransformSpec("wht", n), 0, strict=False)
        assert plan.kappa == pytest.approx(0.25, rel=1e-12)
        assert plan.r == 2

    def test_floor_of_one_round(self):
        assert bootstrap_rounds(16, 16, 0.499) == 1

    def test_kappa_too_large(self):
        with pytest.raises(KappaTooLarge) as info:
            plan_theorem2(1024, 40, 8, 1.0, FastTransformSpec("wht", 1024), 0)
        assert info.value.kappa == pytest.approx(math.sqrt(8 * 40 * math.log(1024) / 1024))
        assert "1.4717" in str(info.value)

    def test_kappa_too_large_even_when_not_strict(self):
        with pytest.raises(KappaTooLarge):
            plan_theorem2(64, 8, 1, 1.0, FastTransformSpec("wht", 64), 0,
                          kappa_override=0.5, strict=False)

    def test_regime(self):
        H = FastTransformSpec("wht", 64)
        with pytest.raises(RegimeViolation):
            plan_theorem2(64, 16, 2, 1.0, H, 0, kappa_override=0.2)
        with pytest.warns(RegimeWarning):
            plan_theorem2(64, 16, 2, 1.0, H, 0, kappa_override=0.2, strict=False)

    def test_inside_regime_is_silent(self):
        n = 2**16
        H = FastTransformSpec("wht", n)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            plan = plan_theorem2(n, 200, 2, 0.5, H, 0)
        assert plan.kappa < 0.5

    def test_seeds_follow_documented_rule(self):
        plan = plan_theorem2(64, 8, 1, 1.0, FastTransformSpec("wht", 64), 99,
                             kappa_override=0.3, strict=False)
        expected = []
        for block in range(1, plan.r + 2):
            expected += [rng.derive_seed(99, block, "eps"), rng.derive_seed(99, block, "eps_prime")]
        assert plan.seeds == tuple(expected)
        assert len(set(plan.seeds)) == len(plan.seeds)

    @pytest.mark.parametrize("n,k,kappa", [(1024, 16, 0.1), (256, 4, 0.3), (64, 64, 0.45)])
    def test_rounds_formula(self, n, k, kappa):
        expected = max(1, math.ceil(-math.log(2 * math.sqrt(n / k)) / math.log(kappa) - 1e-12))
        assert bootstrap_rounds(n, k, kappa) == expected


class TestTheoremTwo:
    def test_rows_scaled_orthonormal(self):
        chain = theorem2_chain(32, 8)
        M = materialize_chain(chain)
        assert np.max(np.abs(M @ M.T - 4 * np.eye(8))) <= 1e-8
        assert np.allclose(np.linalg.norm(M, axis=1), 2.0, atol=1e-8)

    def test_block_count(self):
        chain = theorem2_chain(64, 8, kappa=0.1)
        assert chain.block_count == chain.plan.r + 1
        assert chain.transform_count == 2 * (chain.plan.r + 1) + 1
        assert chain.construction is Construction.THEOREM2

    def test_energy_on_sparse_vectors(self):
        chain = theorem2_chain(32, 8)
        trials = 10_000
        x = random_unit_sparse(np.random.default_rng(2), trials, 32, 2)
        sq = alpha_samples(chain, x, np.arange(trials), seed=5) ** 2
        assert abs(sq.mean() - 1) <= 0.05

    def test_dense_base(self):
        n, k = 32, 8
        Q, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((n, k)))
        P = math.sqrt(n / k) * Q.T
        plan = theorem2_chain(n, k).plan
        chain = build_theorem2(plan, P, FastTransformSpec("wht", n))
        M = materialize_chain(chain)
        assert np.max(np.abs(M @ M.T - 4 * np.eye(k))) <= 1e-8
        assert chain.transform_count == 2 * plan.blocks

    def test_dense_base_rejected(self):
        plan = theorem2_chain(32, 8).plan
        P = np.random.default_rng(4).standard_normal((8, 32))
        with pytest.raises(BaseNotScaledOrthonormal) as info:
            build_theorem2(plan, P, FastTransformSpec("wht", 32))
        assert info.value.deviation > 1e-8

    def test_dft_chain_is_complex(self):
        chain = theorem2_chain(32, 8, H=FastTransformSpec("dft", 32))
        assert chain.field == "complex"
        M = materialize_chain(chain)
        assert np.max(np.abs(M @ M.conj().T - 4 * np.eye(8))) <= 1e-8


CHAINS = {
    "theorem1": lambda n, seed: ChainSpec(n=n, k=n // 4, seed=seed).build(),
    "theorem1-dct": lambda n, seed: ChainSpec(n=n, k=n // 4, seed=seed, transform="dct2").build(),
    "theorem1-dft": lambda n, seed: ChainSpec(n=n, k=n // 4, seed=seed, transform="dft",
                                              omega="random").build(),
    "theorem2": lambda n, seed: theorem2_chain(n, n // 4, seed=seed),
    "gaussian": lambda n, seed: gaussian_baseline(n, n // 4, seed),
}


@pytest.mark.parametrize("name", CHAINS)
class TestApply:
    def test_adjoint_identity(self, name):
        chain = CHAINS[name](64, 1)
        g = np.random.default_rng(5)
        for _ in range(100):
            x = g.standard_normal(64)
            y = g.standard_normal(chain.k)
            if chain.field == "complex":
                x = x + 1j * g.standard_normal(64)
                y = y + 1j * g.standard_normal(chain.k)
            lhs = np.vdot(y, apply_chain(chain, x))
            rhs = np.vdot(apply_chain(chain, y, "adjoint"), x)
            assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(y)

    def test_zero_maps_to_zero(self, name):
        chain = CHAINS[name](32, 2)
        assert not np.any(apply_chain(chain, np.zeros(32)))

    def test_dense_oracle(self, name):
        chain = CHAINS[name](32, 3)
        M = materialize_chain(chain)
        x = np.random.default_rng(6).standard_normal(32)
        y = apply_chain(chain, x)
        assert np.linalg.norm(y - M @ x) <= 1e-8 * np.linalg.norm(M @ x)

    def test_batches_match_rows(self, name):
        chain = CHAINS[name](16, 4)
        X = np.random.default_rng(7).standard_normal((5, 16))
        Y = apply_chain(chain, X)
        for x, y in zip(X, Y):
            assert np.allclose(apply_chain(chain, x), y, rtol=0, atol=1e-13)


def test_materialized_column_is_bitwise_apply():
    chain = ChainSpec(n=16, k=8, seed=9).build()
    e3 = np.zeros(16)
    e3[3] = 1
    assert np.array_equal(materialize_chain(chain)[:, 3], apply_chain(chain, e3))


def test_seed_determinism():
    spec = ChainSpec(construction="theorem2", n=64, k=8, s=1, seed=1234, kappa=0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        a, b = materialize_chain(spec.build()), materialize_chain(spec.build())
    assert np.array_equal(a, b)
    c = materialize_chain(ChainSpec(n=64, k=8, seed=1).build())
    d = materialize_chain(ChainSpec(n=64, k=8, seed=2).build())
    assert not np.array_equal(c, d)


class TestChainSpec:
    def test_text_round_trip(self):
        spec = ChainSpec(construction="theorem2", n=256, k=16, s=2, seed=77,
                         omega="3,5,7,11,13,17,19,23,29,31,37,41,43,47,53,59",
                         transform="dct2", C_kappa=0.125, kappa=0.2, s_min=2)
        back = ChainSpec.from_text(spec.to_text())
        assert back == spec
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            assert np.array_equal(materialize_chain(back.build()), materialize_chain(spec.build()))

    def test_omega_policies(self):
        assert ChainSpec(n=16, k=4, omega="4:8").support() == SupportSet(np.arange(4, 8), 16)
        assert ChainSpec(n=16, k=3, omega="9, 1, 4").support() == SupportSet([1, 4, 9], 16)
        rand = ChainSpec(n=16, k=4, omega="random", seed=5).support()
        assert rand == SupportSet.random(16, 4, rng.derive_seed(5, 0, "omega"))

    def test_bad_text(self):
        with pytest.raises(ConfigParse):
            ChainSpec.from_text("n = 16\nbogus = 1\n")
        with pytest.raises(ConfigParse):
            ChainSpec(omega="a:b").support()
        with pytest.raises(ConfigParse):
            ChainSpec(transform="haar")


class TestErrors:
    def test_length_mismatch(self):
        chain = ChainSpec(n=16, k=8).build()
        with pytest.raises(LengthMismatch):
            apply_chain(chain, np.ones(8))
        with pytest.raises(LengthMismatch):
            apply_chain(chain, np.ones(16), "adjoint")

    def test_field_mismatch(self):
        chain = ChainSpec(n=16, k=8).build()
        with pytest.raises(FieldMismatch):
            apply_chain(chain, np.ones(16) * 1j)

    def test_size_guard(self):
        chain = ChainSpec(n=8192, k=8).build()
        with pytest.raises(SizeGuard):
            materialize_chain(chain)

    def test_bad_support_indices(self):
        with pytest.raises(BadSupport):
            SupportSet([3, 1], 8)
        with pytest.raises(BadSupport):
            SupportSet([0, 8], 8)


def test_sign_vector_is_read_only():
    v = draw_sign_vector(7, 8)
    assert np.array_equal(v.signs, draw_sign_vector(7, 8).signs)
    with pytest.raises(ValueError):
        v.signs[0] = 2.0
