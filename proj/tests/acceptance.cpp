// Full default battery, run twice, mapped onto the fifteen acceptance criteria.
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "intrinsic/suites.hpp"

using namespace intrinsic;

namespace {

struct Run {
    std::map<std::string, Report> reports;
    std::map<std::string, std::string> dumps;
};

Run run_all(unsigned jobs) {
    clear_caches();
    SuiteConfig cfg;
    cfg.jobs = jobs;
    Run r;
    for (const std::string& s : suite_names()) {
        std::cerr << "  " << s << " (jobs " << jobs << ")\n";
        Report rep = run_suite(s, cfg);
        r.dumps[s] = deterministic_dump(rep.to_json());
        r.reports.emplace(s, std::move(rep));
    }
    return r;
}

struct Tally {
    int total = 0, pass = 0, fail = 0, other = 0;
};

bool starts_with(const std::string& s, const std::string& p) { return s.starts_with(p); }

Tally tally(const Run& run, const std::string& prefix,
            const std::function<bool(const Record&)>& keep = {}) {
    Tally t;
    for (const auto& [name, rep] : run.reports)
        for (const Record& r : rep.records()) {
            if (!starts_with(r.id, prefix) || (keep && !keep(r))) continue;
            ++t.total;
            if (r.status == Status::pass) ++t.pass;
            else if (r.status == Status::fail) ++t.fail;
            else ++t.other;
        }
    return t;
}

double seconds(const Run& run, const std::vector<std::string>& sections) {
    double s = 0.0;
    for (const auto& [name, rep] : run.reports)
        for (const auto& [sec, t] : rep.timings())
            for (const std::string& want : sections)
                if (sec == want) s += t;
    return s;
}

bool contains(const std::string& s, const std::string& p) { return s.find(p) != std::string::npos; }

int failures = 0;

void line(int k, bool ok, const std::string& what, const std::string& detail) {
    std::printf("criterion %2d %s  %s  [%s]\n", k, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string describe(const Tally& t) {
    return std::to_string(t.pass) + "/" + std::to_string(t.total) + " pass, " + std::to_string(t.fail) +
           " fail";
}

std::string secs(double s) {
    char b[32];
    std::snprintf(b, sizeof b, "%.1fs", s);
    return b;
}

}  // namespace

int main() {
    std::cerr << "first run\n";
    Run a = run_all(1);
    std::cerr << "second run\n";
    Run b = run_all(2);

    {
        Tally an = tally(a, "dembo_saturation.analytic"), qu = tally(a, "dembo_saturation.quadrature");
        double t = seconds(a, {"dembo_saturation"});
        line(1, an.fail == 0 && qu.fail == 0 && an.pass >= 20 && qu.pass >= 20 && t < 10.0,
             "Gaussian saturation, 1e-6 analytic / 1e-3 quadrature",
             "analytic " + describe(an) + "; quadrature " + describe(qu) + "; " + secs(t));
    }
    {
        Tally g = tally(a, "gl_invariance");
        double t = seconds(a, {"gl_invariance"});
        line(2, g.fail == 0 && g.pass >= 50 && t < 10.0, "linear invariance of the deficit, 1e-6",
             describe(g) + "; " + secs(t));
    }
    {
        Tally c = tally(a, "logdet_chain");
        line(3, c.fail == 0 && c.pass == 2, "log-det chain on 1000 PSD matrices, 1e-10", describe(c));
    }
    {
        Tally am = tally(a, "gns.amgm"), iso = tally(a, "gns.isotropic_equality"), bd = tally(a, "gns.bound");
        double t = seconds(a, {"gns"});
        line(4, am.fail == 0 && iso.fail == 0 && bd.fail == 0 && am.pass >= 100 && iso.pass > 0 && t < 60.0,
             "GNS domination and isotropic equality",
             "domination " + describe(am) + "; isotropy " + describe(iso) + "; bound " + describe(bd) + "; " +
                 secs(t));
    }
    {
        Tally all = tally(a, "beckner.p"), cst = tally(a, "beckner.constant");
        double t = seconds(a, {"beckner"});
        line(5, all.fail == 0 && cst.fail == 0 && all.pass >= 300 && cst.pass == 6 && t < 120.0,
             "Beckner improvement, p in {1, 1.5, 1.9}",
             "battery " + describe(all) + "; u = 1 " + describe(cst) + "; " + secs(t));
    }
    {
        Tally p1 = tally(a, "tensorization.p1"), one = tally(a, "tensorization.one_coordinate");
        double t = seconds(a, {"tensorization"});
        line(6, p1.fail == 0 && one.fail == 0 && p1.pass == 3 && one.pass == 2 && t < 60.0,
             "tensorization on the cube, 1e-9, one-coordinate gap >= 2",
             "random " + describe(p1) + "; one coordinate " + describe(one) + "; " + secs(t));
    }
    {
        Tally e = tally(a, "envelopes");
        double t = seconds(a, {"envelopes"});
        line(7, e.fail == 0 && e.pass >= 101 && t < 60.0, "envelopes vs ODE, 1e-6, factor PD",
             describe(e) + "; " + secs(t));
    }
    {
        Tally x = tally(a, "xi_branches");
        double t = seconds(a, {"xi_branches"});
        line(8, x.fail == 0 && x.pass >= 150 && t < 10.0, "scalar branches vs adaptive RK, 1e-8",
             describe(x) + "; " + secs(t));
    }
    {
        Tally f = tally(a, "flat_local");
        double t = seconds(a, {"flat_local"});
        line(9, f.fail == 0 && f.pass > 0 && t < 60.0, "flat local sandwich and domination",
             describe(f) + "; " + secs(t));
    }
    {
        auto is_case = [](const std::string& suffix) {
            return [suffix](const Record& r) { return contains(r.id, suffix); };
        };
        Tally fa = tally(a, "hamilton.flat[", is_case(".analytic"));
        Tally ff = tally(a, "hamilton.flat[", is_case(".finite_difference"));
        Tally ly = tally(a, "hamilton.flat[", is_case(".li_yau"));
        Tally h3 = tally(a, "hamilton.H3");
        double t = seconds(a, {"hamilton.flat", "hamilton.curved"});
        line(10,
             fa.fail == 0 && ff.fail == 0 && ly.fail == 0 && h3.fail == 0 && fa.pass >= 200 && h3.pass >= 50 &&
                 ly.pass >= 200 && t < 600.0,
             "Hamilton bound, flat and H3, and Li-Yau",
             "flat " + describe(fa) + " / FD " + describe(ff) + "; Li-Yau " + describe(ly) + "; H3 " +
                 describe(h3) + " (" + std::to_string(h3.other) + " unsupported); " + secs(t));
    }
    {
        Tally k = tally(a, "heat_kernel");
        double t = seconds(a, {"heat_kernel"});
        line(11, k.fail == 0 && k.pass == 4 && t < 600.0, "walk endpoint law, chi-square at 0.01",
             describe(k) + "; " + secs(t));
    }
    {
        Tally l = tally(a, "lehec");
        double t = seconds(a, {"lehec"});
        line(12, l.fail == 0 && l.pass == 2 && t < 600.0, "Follmer entropy within 3 SE",
             describe(l) + "; " + secs(t));
    }
    {
        Tally w = tally(a, "wang.", [](const Record& r) { return !contains(r.id, "flat_commutation"); });
        Tally f = tally(a, "wang.flat_commutation");
        double t = seconds(a, {"wang"});
        line(13, w.fail == 0 && f.fail == 0 && w.pass >= 4 && f.pass >= 1 && t < 300.0,
             "Hessian commutation, 3 SE curved, 2e-4 flat",
             "curved " + describe(w) + "; flat " + describe(f) + "; " + secs(t));
    }
    {
        Tally s = tally(a, "spaceform_lsi"), n = tally(a, "nge.");
        Tally tight = tally(a, "spaceform_lsi", [](const Record& r) { return contains(r.id, "ode_tighter"); });
        double t = seconds(a, {"spaceform_lsi", "nge"});
        line(14, s.fail == 0 && n.fail == 0 && s.pass > 0 && n.pass > 0 && tight.pass == tight.total &&
                     tight.total > 0 && t < 600.0,
             "curved entropy sandwich, master ODE at least as tight",
             "envelope/ODE " + describe(s) + "; scalar " + describe(n) + "; tighter " + describe(tight) + "; " +
                 secs(t));
    }
    {
        int same = 0, total = 0;
        std::string diff;
        for (const auto& [name, dump] : a.dumps) {
            ++total;
            if (b.dumps.at(name) == dump) ++same;
            else diff += " " + name;
        }
        line(15, same == total, "byte-identical reports across two runs (1 and 2 workers)",
             std::to_string(same) + "/" + std::to_string(total) + " identical" + (diff.empty() ? "" : ";" + diff));
    }

    int fails_in_reports = 0;
    for (const auto& [name, rep] : a.reports) fails_in_reports += rep.counts().fail;
    std::printf("acceptance: %d of 15 criteria failed; %d fail records in the default battery\n", failures,
                fails_in_reports);
    return failures == 0 ? 0 : 1;
}
