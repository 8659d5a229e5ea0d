import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from orderflow.specialfn import (MLParams, mittag_leffler, ml_cdf, ml_cdf_integral,
                                 ml_density)

# (alpha, beta, x, E_{alpha,beta}(x)) from tests/oracles/ml_oracle.py (mpmath,
# series at adaptive precision or Talbot inversion of the Laplace transform)
ORACLE = [
    (0.3, 0.3, -50, 9.0297795269851064e-5),
    (0.3, 0.3, -20, 0.00054462489804465208),
    (0.3, 0.3, -8, 0.0031107914239239981),
    (0.3, 0.3, -5, 0.0072751008031549117),
    (0.3, 0.3, -2, 0.032062399218847495),
    (0.3, 0.3, -0.5, 0.14375650014722127),
    (0.3, 0.3, 0.7, 2.3447882116084229),
    (0.3, 0.3, 3, 3.5310956396512965e+18),
    (0.3, 0.3, 5, 9.6149821876998458e+94),
    (0.3, 1.0, -50, 0.015228201501814695),
    (0.3, 1.0, -20, 0.037406226213884453),
    (0.3, 1.0, -8, 0.089493095818620724),
    (0.3, 1.0, -5, 0.13708086902027064),
    (0.3, 1.0, -2, 0.29023222616787536),
    (0.3, 1.0, -0.5, 0.63264900594359902),
    (0.3, 1.0, 0.7, 3.174820125365424),
    (0.3, 1.0, 3, 2.7203610806251025e+17),
    (0.3, 1.0, 5, 2.2491502775548074e+93),
    (0.3, 2.0, -50, 0.021568397368757573),
    (0.3, 2.0, -20, 0.05233591564327198),
    (0.3, 2.0, -8, 0.12181776239171603),
    (0.3, 2.0, -5, 0.18222783247195028),
    (0.3, 2.0, -2, 0.36037664355404643),
    (0.3, 2.0, -0.5, 0.69676397759729897),
    (0.3, 2.0, 0.7, 2.3275901632024134),
    (0.3, 2.0, 3, 6985900094652186.5),
    (0.3, 2.0, 5, 1.0522488491962635e+91),
    (0.375, 0.375, -50, 0.00010289047364719215),
    (0.375, 0.375, -20, 0.00062699334435798555),
    (0.375, 0.375, -8, 0.0036608970765019222),
    (0.375, 0.375, -5, 0.0087118741364743255),
    (0.375, 0.375, -2, 0.039951884178467232),
    (0.375, 0.375, -0.5, 0.18405562538272789),
    (0.375, 0.375, 0.7, 2.4583709094887763),
    (0.375, 0.375, 3, 2246421048.443175),
    (0.375, 0.375, 5, 2.1779001099380969e+33),
    (0.375, 1.0, -50, 0.013830757691960676),
    (0.375, 1.0, -20, 0.034152736887162272),
    (0.375, 1.0, -8, 0.082668109987208907),
    (0.375, 1.0, -5, 0.1278722386757017),
    (0.375, 1.0, -2, 0.2778363790146298),
    (0.375, 1.0, -0.5, 0.62566656751517204),
    (0.375, 1.0, 0.7, 3.0032260918365848),
    (0.375, 1.0, 3, 359988865.50008288),
    (0.375, 1.0, 5, 1.4896627209034718e+32),
    (0.375, 2.0, -50, 0.021873077990905204),
    (0.375, 2.0, -20, 0.053120904867309276),
    (0.375, 2.0, -8, 0.12384048380191661),
    (0.375, 2.0, -5, 0.18543219397138612),
    (0.375, 2.0, -2, 0.36696070143044946),
    (0.375, 2.0, -0.5, 0.70501172751049404),
    (0.375, 2.0, 0.7, 2.1587185912954427),
    (0.375, 2.0, 3, 19229398.981217127),
    (0.375, 2.0, 5, 2.0378299371247188e+30),
    (0.5, 0.5, -50, 0.00011277028156766194),
    (0.5, 0.5, -20, 0.00070260872672990058),
    (0.5, 0.5, -8, 0.0043082539407088652),
    (0.5, 0.5, -5, 0.010666394882413155),
    (0.5, 0.5, -2, 0.053398230926744799),
    (0.5, 0.5, -0.5, 0.25634441145129335),
    (0.5, 0.5, 0.7, 2.4812810553406779),
    (0.5, 0.5, 3, 48618.530751582308),
    (0.5, 0.5, 5, 720048993373.86939),
    (0.5, 1.0, -50, 0.011281536265323773),
    (0.5, 1.0, -20, 0.028174348741051319),
    (0.5, 1.0, -8, 0.069985166200880928),
    (0.5, 1.0, -5, 0.11070463773306863),
    (0.5, 1.0, -2, 0.25539567631050574),
    (0.5, 1.0, -0.5, 0.61569034419292587),
    (0.5, 1.0, 0.7, 2.7387021025613168),
    (0.5, 1.0, 3, 16205.988853999587),
    (0.5, 1.0, 5, 144009798674.66104),
    (0.5, 2.0, -50, 0.022172095956416381),
    (0.5, 2.0, -20, 0.053989394226628257),
    (0.5, 2.0, -8, 0.12651591410882784),
    (0.5, 2.0, -5, 0.19010401892842526),
    (0.5, 2.0, -2, 0.37803850262538272),
    (0.5, 2.0, -0.5, 0.71951971096272865),
    (0.5, 2.0, 0.7, 1.9364013991723636),
    (0.5, 2.0, 3, 1800.1781907220333),
    (0.5, 2.0, 5, 5760391946.7207658),
    (0.75, 0.75, -50, 8.6221380547165754e-5),
    (0.75, 0.75, -20, 0.00057356041295395038),
    (0.75, 0.75, -8, 0.0041752734124672942),
    (0.75, 0.75, -5, 0.012140520971468212),
    (0.75, 0.75, -2, 0.084363572245660564),
    (0.75, 0.75, -0.5, 0.42184231246858205),
    (0.75, 0.75, 0.7, 2.2828073954775134),
    (0.75, 0.75, 3, 145.57961543706038),
    (0.75, 0.75, 5, 11778.623429457295),
    (0.75, 1.0, -50, 0.0056311878629451302),
    (0.75, 1.0, -20, 0.014527522154459504),
    (0.75, 1.0, -8, 0.039335854041138191),
    (0.75, 1.0, -5, 0.067923974332643942),
    (0.75, 1.0, -2, 0.20207848341295445),
    (0.75, 1.0, -0.5, 0.60379034509524676),
    (0.75, 1.0, 0.7, 2.317737096285335),
    (0.75, 1.0, 3, 100.86180177510028),
    (0.75, 1.0, 5, 6888.1316797401478),
    (0.75, 2.0, -50, 0.021837946323624853),
    (0.75, 2.0, -20, 0.053727288146448963),
    (0.75, 2.0, -8, 0.12870965059070601),
    (0.75, 2.0, -5, 0.19664358397713058),
    (0.75, 2.0, -2, 0.40194300810790096),
    (0.75, 2.0, -0.5, 0.75151786730302039),
    (0.75, 2.0, 0.7, 1.63669815354993),
    (0.75, 2.0, 3, 22.903523591248931),
    (0.75, 2.0, 5, 805.40446385702671),
    (0.9, 0.9, -50, 4.0536249580922191e-5),
    (0.9, 0.9, -20, 0.00028402595741192639),
    (0.9, 0.9, -8, 0.0025808143045736156),
    (0.9, 0.9, -5, 0.010212790452992133),
    (0.9, 0.9, -2, 0.11059802429320849),
    (0.9, 0.9, -0.5, 0.53190235156843734),
    (0.9, 0.9, 0.7, 2.121925464544098),
    (0.9, 0.9, 3, 37.227740541104376),
    (0.9, 0.9, 5, 524.92592092723235),
    (0.9, 1.0, -50, 0.002175353076856976),
    (0.9, 1.0, -20, 0.0057495078161091126),
    (0.9, 1.0, -8, 0.017095144580796806),
    (0.9, 1.0, -5, 0.034431324804098418),
    (0.9, 1.0, -2, 0.16352830001693004),
    (0.9, 1.0, -0.5, 0.60340549869586097),
    (0.9, 1.0, 0.7, 2.1240621309182167),
    (0.9, 1.0, 3, 32.921897176850825),
    (0.9, 1.0, 5, 438.95181466448263),
    (0.9, 2.0, -50, 0.020933665399611778),
    (0.9, 2.0, -20, 0.051979946729880641),
    (0.9, 2.0, -8, 0.12737741429596877),
    (0.9, 2.0, -5, 0.19845803684071396),
    (0.9, 2.0, -2, 0.41896056446508772),
    (0.9, 2.0, -0.5, 0.77245380829774061),
    (0.9, 2.0, 0.7, 1.5142500931485895),
    (0.9, 2.0, 3, 9.3509010402901789),
    (0.9, 2.0, 5, 73.199935805814627),
    (0.97, 0.97, -50, 1.2822996713679906e-5),
    (0.97, 0.97, -20, 9.2121851297275049e-5),
    (0.97, 0.97, -8, 0.0011495247751309358),
    (0.97, 0.97, -5, 0.0080185120522823907),
    (0.97, 0.97, -2, 0.12709236972801386),
    (0.97, 0.97, -0.5, 0.58421640297521132),
    (0.97, 0.97, 0.7, 2.0460276663160293),
    (0.97, 0.97, 3, 23.764263443487337),
    (0.97, 0.97, 5, 207.5597716693345),
    (0.97, 1.0, -50, 0.00063473970809687388),
    (0.97, 1.0, -20, 0.0016961135236805744),
    (0.97, 1.0, -8, 0.005547514375553688),
    (0.97, 1.0, -5, 0.015636959031940072),
    (0.97, 1.0, -2, 0.1439478234106674),
    (0.97, 1.0, -0.5, 0.60529480845078951),
    (0.97, 1.0, 0.7, 2.0454525622487093),
    (0.97, 1.0, 3, 22.962361165576482),
    (0.97, 1.0, 5, 197.47590881492347),
    (0.97, 2.0, -50, 0.020309007296686751),
    (0.97, 2.0, -20, 0.050669096278367913),
    (0.97, 2.0, -8, 0.12583706985205396),
    (0.97, 2.0, -5, 0.19868142511203333),
    (0.97, 2.0, -2, 0.42810924585540306),
    (0.97, 2.0, -0.5, 0.78255960698726444),
    (0.97, 2.0, 0.7, 1.4669240460931484),
    (0.97, 2.0, 3, 7.0566293820157966),
    (0.97, 2.0, 5, 37.372901073512216),
]


@pytest.mark.parametrize("alpha,beta,x,expected", ORACLE)
def test_against_high_precision_oracle(alpha, beta, x, expected):
    assert mittag_leffler(alpha, beta, x) == pytest.approx(expected, rel=1e-10, abs=1e-300)


def test_series_reference_value():
    # 500-term series of E_{1/2,1/2}(-1) evaluated in mpmath
    assert mittag_leffler(0.5, 0.5, -1.0) == pytest.approx(0.13660600739194928254, rel=1e-13)


def test_exponential_case():
    x = np.linspace(-5, 5, 1000)
    got = np.array([mittag_leffler(1.0, 1.0, v) for v in x])
    assert np.max(np.abs(got - np.exp(x)) / np.exp(x)) < 1e-10


def test_alpha_one_beta_two():
    assert mittag_leffler(1.0, 2.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-14)


def test_zero_argument():
    for beta in (0.5, 1.0, 2.0, 3.5):
        assert mittag_leffler(0.4, beta, 0.0) == pytest.approx(1.0 / math.gamma(beta))


def test_half_order_closed_form():
    # E_{1/2,1}(-x) = exp(x^2) erfc(x)
    for x in (0.1, 0.7, 2.0, 6.0, 20.0):
        assert mittag_leffler(0.5, 1.0, -x) == pytest.approx(special.erfcx(x), rel=1e-11)


def test_overflow_reported():
    with pytest.raises(OverflowError):
        mittag_leffler(0.3, 1.0, 400.0)


@pytest.mark.parametrize("bad", [(0.0, 1.0), (1.2, 1.0), (0.5, 0.0), (0.5, -1.0)])
def test_parameter_domain(bad):
    with pytest.raises(ValueError):
        mittag_leffler(bad[0], bad[1], 0.3)
    with pytest.raises(ValueError):
        MLParams(*bad)


def test_density_domain():
    with pytest.raises(ValueError):
        ml_density(0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        ml_cdf(0.5, 1.0, -1.0)
    with pytest.raises(ValueError):
        MLParams(0.5, 1.0, 0.0)


@pytest.mark.parametrize("alpha", [0.3, 0.375, 0.45, 0.75, 0.9])
def test_density_integrates_to_one(alpha):
    f = lambda x: ml_density(alpha, 1.3, x)
    head, _ = integrate.quad(f, 0, 1, limit=200)
    # substitute x = 1/u on the tail
    tail, _ = integrate.quad(lambda u: f(1.0 / u) / u ** 2, 0, 1, limit=400)
    assert head + tail == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("alpha,lam", [(0.375, 1.0), (0.75, 2.0), (0.45, 0.5)])
def test_cdf_matches_density(alpha, lam):
    for x in (0.05, 0.5, 2.0, 10.0):
        got, _ = integrate.quad(lambda s: ml_density(alpha, lam, s), 0, x, limit=200)
        assert ml_cdf(alpha, lam, x) == pytest.approx(got, rel=1e-7)


@pytest.mark.parametrize("alpha,lam", [(0.375, 1.0), (0.75, 1.0)])
def test_cdf_integral_is_mean_path(alpha, lam):
    for t in (0.1, 0.5, 1.0, 3.0):
        got, _ = integrate.quad(lambda s: s * ml_density(alpha, lam, t - s), 0, t, limit=200)
        assert ml_cdf_integral(alpha, lam, t) == pytest.approx(got, rel=1e-7)


@pytest.mark.parametrize("alpha", [0.3, 0.375, 0.45])
def test_small_h_expansion(alpha):
    lam = 1.0
    lead = lam / math.gamma(alpha + 1.0)
    second = lam ** 2 / math.gamma(2 * alpha + 1.0)
    for h in (1e-8, 1e-6, 1e-4):
        rho = ml_cdf(alpha, lam, h)
        remainder = (rho - lead * h ** alpha) / h ** (2 * alpha)
        # remainder is -lam^2 / Gamma(2 alpha + 1) + O(h^alpha)
        assert remainder == pytest.approx(-second, abs=3.0 * h ** alpha)


def test_cdf_vectorised_and_monotone():
    x = np.linspace(0, 30, 3001)
    c = ml_cdf(0.375, 1.0, x)
    assert c[0] == 0.0
    assert np.all(np.diff(c) > 0)
    assert np.all((c >= 0) & (c < 1))


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(0.2, 1.0 - 1e-8) | st.just(1.0), lam=st.floats(0.1, 5.0),
       x=st.floats(1e-6, 50.0))
def test_cdf_in_unit_interval_and_consistent(alpha, lam, x):
    c = ml_cdf(alpha, lam, x)
    assert 0.0 <= c <= 1.0
    # 1 - E_{alpha,1}(-y) computed directly agrees where there is no cancellation
    if c > 0.1:
        assert c == pytest.approx(1.0 - mittag_leffler(alpha, 1.0, -lam * x ** alpha), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(0.2, 0.99), beta=st.floats(0.2, 3.0), y=st.floats(0.01, 40.0))
def test_recurrence(alpha, beta, y):
    # E_{a,b}(z) = 1/Gamma(b) + z E_{a,a+b}(z)
    lhs = mittag_leffler(alpha, beta, -y)
    rhs = 1.0 / math.gamma(beta) - y * mittag_leffler(alpha, alpha + beta, -y)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-12)


def test_cdf_reference_points():
    assert ml_cdf(0.375, 1.0, 0.0) == 0.0
    assert ml_cdf(1.0, 2.0, 1.0) == pytest.approx(1.0 - math.exp(-2.0), rel=1e-13)


def test_small_h_leading_term():
    h = 1e-4
    lead = h ** 0.375 / math.gamma(1.375)
    assert abs(ml_cdf(0.375, 1.0, h) - lead) < 2.0 * h ** 0.75


def test_density_against_finite_difference():
    h = 1e-7
    fd = (ml_cdf(0.375, 1.0, 0.5 + h) - ml_cdf(0.375, 1.0, 0.5 - h)) / (2 * h)
    assert ml_density(0.375, 1.0, 0.5) == pytest.approx(fd, abs=1e-6)


def test_forward_difference_consistency():
    rng = np.random.default_rng(0)
    h = 1e-6
    for x in rng.uniform(0.1, 10.0, 100):
        fd = (ml_cdf(0.375, 1.0, x + h) - ml_cdf(0.375, 1.0, x)) / h
        assert abs(fd - ml_density(0.375, 1.0, x)) < 1e-5


@pytest.mark.parametrize("gap", [1e-4, 1e-6, 1e-8])
@pytest.mark.parametrize("y", [6.0, 15.0, 37.0])
def test_near_one_order(gap, y):
    # the integrand peaks sharply at r = y as alpha -> 1; values from
    # Talbot inversion of s^(alpha - beta) / (s^alpha + y) at 50 digits
    import mpmath as mp
    mp.mp.dps = 50
    a = 1.0 - gap
    for b in (1.0, 0.5):
        ref = mp.invertlaplace(lambda s: s ** (mp.mpf(a) - b) / (s ** mp.mpf(a) + y), 1,
                               method="talbot")
        assert mittag_leffler(a, b, -y) == pytest.approx(float(ref), rel=1e-9)
