#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "epp/commands.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw std::invalid_argument("empty entry in list '" + s + "'");
        out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

epp::Region parse_region(const std::string& s) { return epp::Region(parse_int_list(s)); }

void parse_range(const std::string& s, double& start, double& stop, double& step) {
    std::istringstream is(s);
    char c1 = 0, c2 = 0;
    if (!(is >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':')
        throw std::invalid_argument("range '" + s + "' must be start:stop:step");
}

int emit(const epp::CsvTable& table, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << table.to_string();
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot open output file '" << out_path << "'\n";
        return 1;
    }
    f << table.to_string();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extraction of pure bipartite entanglement by local projective measurement"};
    app.require_subcommand(1);

    auto* sup = app.add_subcommand(
        "supersinglet", "best E_PP of the N-party supersinglet over single-site regions");
    int sup_n = 3;
    std::string sup_out;
    sup->add_option("--n", sup_n, "party count = local dimension (2..5)")->required();
    sup->add_option("--out", sup_out, "write CSV here instead of stdout");

    auto* qu = app.add_subcommand("quench",
                                  "two-flip XX ring quench with block measurements over time");
    int q_n = 24;
    std::string q_flips = "10,14", q_blocks = "2,4,6,8,10,12", q_place, q_out;
    double q_tmax = 6.0, q_dt = 0.05;
    qu->add_option("--sites", q_n, "ring length N");
    qu->add_option("--flips", q_flips, "initial flip sites r1,r2");
    qu->add_option("--t-max", q_tmax, "end of the time grid");
    qu->add_option("--dt", q_dt, "time step");
    qu->add_option("--blocks", q_blocks, "block widths, e.g. 2,4,6");
    qu->add_option("--placement", q_place, "explicit regions 'sites;sites' (overrides --blocks)");
    qu->add_option("--out", q_out, "write CSV here instead of stdout");

    auto* gr = app.add_subcommand("groundstate",
                                  "two-flip ground state: block measurements vs block size");
    int g_n = 24, g_delta = 0;
    double g_field = 0.0;
    std::string g_out;
    gr->add_option("--sites", g_n, "ring length N");
    auto* g_field_opt = gr->add_option("--field", g_field, "transverse field h");
    gr->add_option("--delta-max", g_delta, "largest block width (default N/2)");
    gr->add_option("--out", g_out, "write CSV here instead of stdout");

    auto* sw = app.add_subcommand("sweep", "XY-model (gamma, h) grid: general search at N=6");
    std::string s_gamma = "-1:1:0.05", s_field = "-2:2:0.05", s_out;
    int s_workers = 1;
    sw->add_option("--gamma", s_gamma, "anisotropy grid start:stop:step");
    sw->add_option("--field", s_field, "field grid start:stop:step");
    sw->add_option("--workers", s_workers, "concurrent grid workers");
    sw->add_option("--out", s_out, "write CSV here instead of stdout");

    auto* se = app.add_subcommand("search", "general projector search on a state file");
    std::string e_state, e_ra, e_rb, e_out;
    se->add_option("--state", e_state, "state-vector text file")->required();
    se->add_option("--region-a", e_ra, "region A sites, e.g. 1,2")->required();
    se->add_option("--region-b", e_rb, "region B sites, e.g. 4,5")->required();
    se->add_option("--out", e_out, "write CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sup->parsed()) return emit(epp::cmd_supersinglet(sup_n), sup_out);

        if (qu->parsed()) {
            epp::QuenchOptions opt;
            opt.n = q_n;
            std::vector<int> flips = parse_int_list(q_flips);
            if (flips.size() != 2) throw std::invalid_argument("--flips needs exactly r1,r2");
            opt.r1 = flips[0];
            opt.r2 = flips[1];
            opt.t_max = q_tmax;
            opt.dt = q_dt;
            opt.blocks = parse_int_list(q_blocks);
            if (!q_place.empty()) {
                auto semi = q_place.find(';');
                if (semi == std::string::npos)
                    throw std::invalid_argument("--placement needs 'sites;sites'");
                opt.placement = {parse_region(q_place.substr(0, semi)),
                                 parse_region(q_place.substr(semi + 1))};
            }
            return emit(epp::cmd_quench(opt), q_out);
        }

        if (gr->parsed()) {
            epp::GroundstateOptions opt;
            opt.n = g_n;
            if (g_field_opt->count() > 0) opt.h = g_field;
            opt.delta_max = g_delta;
            return emit(epp::cmd_groundstate(opt, &std::cerr), g_out);
        }

        if (sw->parsed()) {
            epp::SweepOptions opt;
            parse_range(s_gamma, opt.gamma_start, opt.gamma_stop, opt.gamma_step);
            parse_range(s_field, opt.h_start, opt.h_stop, opt.h_step);
            opt.workers = s_workers;
            return emit(epp::cmd_sweep(opt), s_out);
        }

        if (se->parsed()) {
            std::ifstream f(e_state);
            if (!f) {
                std::cerr << "input format error: cannot open state file '" << e_state << "'\n";
                return 3;
            }
            epp::PureState st = epp::read_state_file(f);
            return emit(epp::cmd_search_state(st, parse_region(e_ra), parse_region(e_rb)),
                        e_out);
        }
        return 2;
    } catch (const epp::StateFormatError& e) {
        std::cerr << "input format error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
