#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "tsf/csv.hpp"
#include "tsf/errors.hpp"
#include "tsf/pmsm.hpp"

using namespace tsf;
using pmsm::Excitation;
using pmsm::MotorParams;
using pmsm::Regime;

namespace {

// Independent oracle: classic RK4 on the same ODE right-hand side, run at a
// 10x finer step with zero-order-hold voltages.
void rk4_reference(const MotorParams& p, const std::vector<double>& u_d,
                   const std::vector<double>& u_q, double omega, std::vector<double>& i_d,
                   std::vector<double>& i_q) {
    const int refine = 10;
    const double h = p.dt / refine;
    auto f_d = [&](double id, double iq, double ud) {
        return (ud - p.resistance * id + omega * p.l_q * iq) / p.l_d;
    };
    auto f_q = [&](double id, double iq, double uq) {
        return (uq - p.resistance * iq - omega * p.l_d * id - omega * p.psi) / p.l_q;
    };
    i_d.assign(u_d.size(), 0.0);
    i_q.assign(u_q.size(), 0.0);
    double id = 0.0, iq = 0.0;
    for (std::size_t t = 0; t + 1 < u_d.size(); ++t) {
        for (int s = 0; s < refine; ++s) {
            const double k1d = f_d(id, iq, u_d[t]);
            const double k1q = f_q(id, iq, u_q[t]);
            const double k2d = f_d(id + 0.5 * h * k1d, iq + 0.5 * h * k1q, u_d[t]);
            const double k2q = f_q(id + 0.5 * h * k1d, iq + 0.5 * h * k1q, u_q[t]);
            const double k3d = f_d(id + 0.5 * h * k2d, iq + 0.5 * h * k2q, u_d[t]);
            const double k3q = f_q(id + 0.5 * h * k2d, iq + 0.5 * h * k2q, u_q[t]);
            const double k4d = f_d(id + h * k3d, iq + h * k3q, u_d[t]);
            const double k4q = f_q(id + h * k3d, iq + h * k3q, u_q[t]);
            id += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
            iq += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
        }
        i_d[t + 1] = id;
        i_q[t + 1] = iq;
    }
}

}  // namespace

TEST_CASE("equilibrium: zero input and zero speed stays exactly at zero") {
    // The flux term enters only scaled by omega, so omega=0 nulls it exactly.
    MotorParams p;
    std::vector<double> u(50, 0.0);
    auto [i_d, i_q] = pmsm::simulate_motor(p, u, u, 0.0);
    for (double v : i_d) CHECK(v == 0.0);
    for (double v : i_q) CHECK(v == 0.0);
}

TEST_CASE("scalar decay: i_d shrinks geometrically with ratio 1 - dt*R/Ld") {
    MotorParams p;
    std::vector<double> u(20, 0.0);
    auto [i_d, i_q] = pmsm::simulate_motor(p, u, u, 0.0, 1.0, 0.0);
    const double ratio = 1.0 - p.dt * p.resistance / p.l_d;
    double expect = 1.0;
    for (std::size_t t = 0; t < i_d.size(); ++t) {
        CHECK(i_d[t] == doctest::Approx(expect).epsilon(1e-12));
        expect *= ratio;
    }
    for (double v : i_q) CHECK(v == 0.0);
}

TEST_CASE("at zero speed the axes decouple exactly") {
    MotorParams p;
    std::vector<double> zeros(40, 0.0), steps(40, 5.0);
    // Drive only the d axis; q current must stay exactly zero (and vice versa).
    auto [d1, q1] = pmsm::simulate_motor(p, steps, zeros, 0.0);
    for (double v : q1) CHECK(v == 0.0);
    auto [d2, q2] = pmsm::simulate_motor(p, zeros, steps, 0.0);
    for (double v : d2) CHECK(v == 0.0);
}

TEST_CASE("euler trajectory tracks the RK4 oracle at default params") {
    MotorParams p;
    Excitation exc;
    Rng rng(42);
    const auto prof = pmsm::sample_quadrant_controls(exc, p, Regime::iid, 100, rng);
    auto [i_d, i_q] = pmsm::simulate_motor(p, prof.u_d, prof.u_q, prof.omega);
    std::vector<double> rd, rq;
    rk4_reference(p, prof.u_d, prof.u_q, prof.omega, rd, rq);
    double max_dev = 0.0;
    for (std::size_t t = 0; t < rd.size(); ++t) {
        max_dev = std::max(max_dev, std::abs(i_d[t] - rd[t]));
        max_dev = std::max(max_dev, std::abs(i_q[t] - rq[t]));
    }
    CHECK(max_dev < 1e-3);
}

TEST_CASE("motor params validation") {
    MotorParams p;
    CHECK_NOTHROW(p.validate(200.0));
    MotorParams bad = p;
    bad.dt = 1.0;  // way past stability for these constants
    CHECK_THROWS_AS(bad.validate(200.0), ParamError);
    MotorParams neg = p;
    neg.l_d = -1.0;
    CHECK_THROWS_AS(neg.validate(10.0), ParamError);
}

TEST_CASE("quadrant purity: IID product positive, OOD negative, everywhere") {
    MotorParams p;
    Excitation exc;
    Rng rng(7);
    for (int rep = 0; rep < 10; ++rep) {
        const auto iid = pmsm::sample_quadrant_controls(exc, p, Regime::iid, 200, rng);
        for (std::size_t t = 0; t < iid.u_d.size(); ++t) {
            CHECK(iid.u_d[t] * iid.u_q[t] > 0.0);
        }
        const auto ood = pmsm::sample_quadrant_controls(exc, p, Regime::ood, 200, rng);
        for (std::size_t t = 0; t < ood.u_d.size(); ++t) {
            CHECK(ood.u_d[t] * ood.u_q[t] < 0.0);
        }
    }
}

TEST_CASE("each generated series owns its rotor speed and both IID quadrants appear") {
    MotorParams p;
    Excitation exc;
    Rng rng(11);
    bool saw_q1 = false, saw_q3 = false;
    double prev_omega = -1.0;
    for (int i = 0; i < 3; ++i) {
        const Series sr = pmsm::generate_series(p, exc, Regime::iid, 100, i, rng);
        CHECK(sr.len == 100);
        CHECK(sr.omega >= exc.omega_min);
        CHECK(sr.omega <= exc.omega_max);
        CHECK(sr.omega != prev_omega);
        prev_omega = sr.omega;
        for (int t = 0; t < sr.len; ++t) {
            if (sr.u_at(0, t) > 0) saw_q1 = true;
            if (sr.u_at(0, t) < 0) saw_q3 = true;
        }
    }
    CHECK(saw_q1);
    CHECK(saw_q3);
}

TEST_CASE("current guard trips as an instability error") {
    MotorParams p;
    p.i_max = 0.01;  // absurdly tight bound
    std::vector<double> u(200, 0.8 * p.u_max);
    CHECK_THROWS_AS(pmsm::simulate_motor(p, u, u, 50.0), InstabilityError);
}

TEST_CASE("voltage bound is enforced") {
    MotorParams p;
    std::vector<double> u(10, p.u_max * 1.5);
    CHECK_THROWS_AS(pmsm::simulate_motor(p, u, u, 0.0), ParamError);
}

TEST_CASE("csv round-trip is value-exact; format errors carry diagnostics") {
    MotorParams p;
    Excitation exc;
    Rng rng(3);
    SeriesSet set;
    set.n = 2;
    for (int i = 0; i < 2; ++i) {
        set.series.push_back(pmsm::generate_series(p, exc, Regime::iid, 30, i, rng));
    }
    const auto tmp = std::filesystem::temp_directory_path() / "tsf_pmsm_roundtrip.csv";
    csv::write_series(tmp, set, csv::SchemaKind::motor);
    const SeriesSet back = csv::read_motor(tmp);
    REQUIRE(back.series.size() == set.series.size());
    for (std::size_t i = 0; i < set.series.size(); ++i) {
        CHECK(back.series[i].x == set.series[i].x);  // bit-identical
        CHECK(back.series[i].u == set.series[i].u);
        CHECK(back.series[i].omega == set.series[i].omega);
    }
    std::filesystem::remove(tmp);

    // Missing column names the column.
    const auto bad = std::filesystem::temp_directory_path() / "tsf_pmsm_bad.csv";
    {
        std::ofstream out(bad);
        out << "t,i_d,i_q,u_d,omega_r,series_id\n0,0,0,0,10,0\n";
    }
    try {
        csv::read_motor(bad);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("u_q") != std::string::npos);
    }
    std::filesystem::remove(bad);

    // Non-monotonic t within a series is rejected with the row number.
    const auto nm = std::filesystem::temp_directory_path() / "tsf_pmsm_nonmono.csv";
    {
        std::ofstream out(nm);
        out << "t,i_d,i_q,u_d,u_q,omega_r,series_id\n"
            << "0,0,0,1,1,10,0\n"
            << "0,0,0,1,1,10,0\n";
    }
    CHECK_THROWS_AS(csv::read_motor(nm), FormatError);
    std::filesystem::remove(nm);

    // Column map remaps custom headers.
    const auto cm = std::filesystem::temp_directory_path() / "tsf_pmsm_colmap.csv";
    {
        std::ofstream out(cm);
        out << "time,id_amp,iq_amp,ud_volt,uq_volt,speed,sid\n"
            << "0,0.5,0.25,1,1,10,0\n"
            << "1,0.5,0.25,1,1,10,0\n";
    }
    const SeriesSet mapped = csv::read_motor(cm, {{"t", "time"},
                                                  {"i_d", "id_amp"},
                                                  {"i_q", "iq_amp"},
                                                  {"u_d", "ud_volt"},
                                                  {"u_q", "uq_volt"},
                                                  {"omega_r", "speed"},
                                                  {"series_id", "sid"}});
    REQUIRE(mapped.series.size() == 1);
    CHECK(mapped.series[0].len == 2);
    CHECK(mapped.series[0].x_at(0, 0) == 0.5);
    std::filesystem::remove(cm);
}

TEST_CASE("well-formed two-row file yields a series of length two") {
    const auto path = std::filesystem::temp_directory_path() / "tsf_pmsm_tworow.csv";
    {
        std::ofstream out(path);
        out << "t,i_d,i_q,u_d,u_q,omega_r,series_id\n"
            << "0,0.1,0.2,1,2,30,7\n"
            << "1,0.15,0.25,1,2,30,7\n";
    }
    const SeriesSet set = csv::read_motor(path);
    REQUIRE(set.series.size() == 1);
    CHECK(set.series[0].len == 2);
    CHECK(set.series[0].id == 7);
    CHECK(set.series[0].omega == 30.0);
    std::filesystem::remove(path);
}
