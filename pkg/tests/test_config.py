import numpy as np
import pytest

from mimo_secrecy.config import (AnMethod, ConfigError, PathLossMode,
                                 SystemConfig, Training, build_path_loss,
                                 db_to_linear, derive_params,
                                 parse_config_file, validate_config,
                                 with_params)


def base_cfg(**kw):
    d = dict(M=7, N_t=100, N_e=10, K=10, rho=0.1, P=10.0, phi=0.75)
    d.update(kw)
    return SystemConfig(**d)


class TestValidation:
    def test_valid_passes(self):
        assert validate_config(base_cfg()) is not None

    @pytest.mark.parametrize("kw,msg", [
        (dict(M=0), "M must be"),
        (dict(N_t=0), "positive"),
        (dict(K=100), "K must be < N_t"),
        (dict(rho=1.5), "rho"),
        (dict(phi=0.0), "phi"),
        (dict(phi=1.2), "phi"),
        (dict(P=-1.0), "P must be"),
        (dict(p_tau=0.0), "p_tau"),
        (dict(tau=0), "tau"),
        (dict(T_coh=0), "coherence"),
        (dict(sigma_mt_sq=0.0), "sigma"),
    ])
    def test_rejects(self, kw, msg):
        with pytest.raises(ConfigError, match=msg):
            validate_config(base_cfg(**kw))

    def test_tau_vs_k_under_contamination(self):
        cfg = base_cfg(K=20, tau=10, training=Training.PILOT_CONTAMINATION)
        with pytest.raises(ConfigError, match="tau >= K"):
            validate_config(cfg)
        # same tau is fine with perfect training
        validate_config(base_cfg(K=20, tau=10))

    def test_with_params_revalidates(self):
        cfg = base_cfg()
        assert with_params(cfg, phi=0.5).phi == 0.5
        with pytest.raises(ConfigError):
            with_params(cfg, phi=2.0)


class TestDerivedParams:
    def test_values(self):
        dp = derive_params(base_cfg())
        assert dp.a == pytest.approx(1.6)
        assert dp.b == pytest.approx(0.7)
        assert dp.c == pytest.approx(1.06)
        assert dp.alpha == pytest.approx(0.1)
        assert dp.beta == pytest.approx(0.1)
        assert dp.p == pytest.approx(0.75)
        assert dp.q == pytest.approx(2.5 / 90)
        assert dp.eta == pytest.approx(dp.q / dp.p)
        assert dp.zeta == pytest.approx(
            dp.a * dp.beta / dp.alpha - dp.beta * dp.c / (dp.a * (1 - dp.beta)))

    def test_lambda_estimate_quality(self):
        dp = derive_params(base_cfg(p_tau=1.0, tau=10))
        assert dp.lam == pytest.approx(10.0 / 17.0)
        # lambda -> 1/a as pilot energy grows
        dp_hi = derive_params(base_cfg(p_tau=1e9, tau=10))
        assert dp_hi.lam == pytest.approx(1.0 / dp_hi.a, rel=1e-6)

    def test_single_cell_degenerates(self):
        dp = derive_params(base_cfg(M=1, rho=0.0))
        assert dp.a == 1.0 and dp.c == 1.0
        assert dp.b == pytest.approx(0.1)

    def test_eta_zero_without_an(self):
        assert derive_params(base_cfg(phi=1.0)).eta == 0.0


class TestPathLoss:
    def test_simplified(self):
        cfg = base_cfg()
        pl = build_path_loss(cfg)
        assert pl.mode is PathLossMode.SIMPLIFIED
        assert pl.l_user.shape == (7, 10)
        assert np.all(pl.l_user[0] == 1.0)
        assert np.all(pl.l_user[1:] == 0.1)
        assert pl.l_eve[0] == 1.0 and np.all(pl.l_eve[1:] == 0.1)

    def test_explicit(self):
        cfg = base_cfg(M=2, K=3)
        lu = np.array([[1.0, 0.9, 0.8], [0.2, 0.1, 0.3]])
        pl = build_path_loss(cfg, l_user=lu, l_eve=np.array([1.0, 0.5]))
        assert pl.mode is PathLossMode.EXPLICIT
        np.testing.assert_allclose(pl.l_user, lu)

    def test_explicit_shape_and_range_checks(self):
        cfg = base_cfg(M=2, K=3)
        with pytest.raises(ConfigError, match="shape"):
            build_path_loss(cfg, l_user=np.ones((3, 2)))
        with pytest.raises(ConfigError, match="\\[0, 1\\]"):
            build_path_loss(cfg, l_user=2 * np.ones((2, 3)))


class TestConfigFile:
    CONTENT = """\
# scenario
cells = 7
bs_antennas = 100
eve_antennas = 10
users = 10
rho = 0.1
power_db = 10  # linear 10
phi = 0.75
training = contaminated
an_method = random
pilot_power_db = 0
pilot_length = 10
coherence = 200
trials = 500
seed = 42
"""

    def write(self, tmp_path, text):
        p = tmp_path / "scenario.conf"
        p.write_text(text)
        return p

    def test_roundtrip(self, tmp_path):
        cfg, settings = parse_config_file(self.write(tmp_path, self.CONTENT))
        assert cfg.M == 7 and cfg.N_t == 100 and cfg.K == 10
        assert cfg.P == pytest.approx(10.0)
        assert cfg.p_tau == pytest.approx(1.0)
        assert cfg.training is Training.PILOT_CONTAMINATION
        assert cfg.an_method is AnMethod.RANDOM
        assert cfg.T_coh == 200
        assert settings.trials == 500 and settings.seed == 42

    def test_defaults(self, tmp_path):
        text = "\n".join(l for l in self.CONTENT.splitlines()
                         if l.split("=")[0].strip() in
                         ("cells", "bs_antennas", "eve_antennas", "users",
                          "rho", "power_db", "phi"))
        cfg, settings = parse_config_file(self.write(tmp_path, text))
        assert cfg.training is Training.PERFECT
        assert cfg.tau == cfg.K
        assert settings.trials == 3000 and settings.seed == 0

    @pytest.mark.parametrize("mangle,msg", [
        (lambda t: t + "bogus_key = 1\n", "unknown key"),
        (lambda t: t + "cells = 3\n", "duplicate key"),
        (lambda t: t.replace("cells = 7\n", ""), "missing required key"),
        (lambda t: t.replace("rho = 0.1", "rho = abc"), "must be a number"),
        (lambda t: t.replace("cells = 7", "cells"), "expected 'key = value'"),
        (lambda t: t.replace("training = contaminated", "training = psychic"),
         "training must be"),
    ])
    def test_bad_files(self, tmp_path, mangle, msg):
        with pytest.raises(ConfigError, match=msg):
            parse_config_file(self.write(tmp_path, mangle(self.CONTENT)))


def test_db_to_linear():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(-3.0) == pytest.approx(0.501187, rel=1e-5)
