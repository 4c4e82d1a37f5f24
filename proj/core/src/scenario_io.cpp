#include "mpslam/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

namespace mpslam {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line, const std::string& field) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(line, field, "not a number: '" + tok + "'");
  return v;
}

std::vector<double> row_values(const std::vector<std::string>& toks, const std::vector<std::string>& names,
                               std::size_t optional_tail, std::size_t line) {
  const std::size_t required = names.size() - optional_tail;
  if (toks.size() < required) throw ParseError(line, names[toks.size()], "missing field");
  if (toks.size() > names.size()) throw ParseError(line, "row", "too many fields");
  if (toks.size() > required && toks.size() != names.size())
    throw ParseError(line, names[toks.size()], "missing field");
  std::vector<double> v;
  for (std::size_t i = 0; i < toks.size(); ++i) v.push_back(to_double(toks[i], line, names[i]));
  return v;
}

Dispersion dispersion_from(double d_m, double theta_deg, double vartheta_deg, std::size_t line,
                           const std::vector<std::string>& names, std::size_t offset) {
  if (d_m < 0.0) throw ParseError(line, names[offset], "dispersion must be nonnegative");
  if (theta_deg < 0.0) throw ParseError(line, names[offset + 1], "dispersion must be nonnegative");
  if (vartheta_deg < 0.0) throw ParseError(line, names[offset + 2], "dispersion must be nonnegative");
  return {d_m / kSpeedOfLight, deg2rad(theta_deg), deg2rad(vartheta_deg)};
}

const std::vector<std::string> kPaFields{"x_m", "y_m", "psi_d_m", "psi_theta_deg", "psi_vartheta_deg"};
const std::vector<std::string> kSurfaceFields{"ax_m", "ay_m", "bx_m", "by_m", "psi_d_m",
                                              "psi_theta_deg", "psi_vartheta_deg", "nx", "ny"};
const std::vector<std::string> kTrajectoryFields{"px_m", "py_m", "vx_mps", "vy_mps"};

struct PendingSurface {
  Vec2 a, b;
  Dispersion psi;
  bool has_normal = false;
  Vec2 normal;
  std::size_t line = 0;
};

}  // namespace

ParseError::ParseError(std::size_t line, std::string field, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + what),
      line_(line),
      field_(std::move(field)) {}

Scenario parse_scenario(std::istream& in) {
  Scenario s;
  ModelConstants& c = s.constants;
  std::map<std::string, std::function<void(const std::vector<double>&)>> scalar{
      {"delta_t_s", [&](auto& v) { c.delta_t = v[0]; }},
      {"snr_1m_db", [&](auto& v) { c.snr_1m_db = v[0]; }},
      {"bandwidth_hz", [&](auto& v) { c.bandwidth = v[0]; }},
      {"carrier_hz", [&](auto& v) { c.carrier = v[0]; }},
      {"reflection_loss_db", [&](auto& v) { c.reflection_loss_db = v[0]; }},
      {"beta_sub", [&](auto& v) { c.beta_sub = v[0]; }},
      {"mu_fp", [&](auto& v) { c.mu_fp = v[0]; }},
      {"p_d", [&](auto& v) { c.p_d = v[0]; }},
      {"n_ny_tau", [&](auto& v) { c.n_ny_tau = v[0]; }},
      {"n_ny_theta", [&](auto& v) { c.n_ny_theta = v[0]; }},
      {"n_ny_vartheta", [&](auto& v) { c.n_ny_vartheta = v[0]; }},
      {"gamma_det", [&](auto& v) { c.gamma_det = v[0]; }},
      {"tau_max_s", [&](auto& v) { c.tau_max = v[0]; }},
      {"beta_bw_hz", [&](auto& v) { c.beta_bw = v[0]; }},
      {"k_theta_deg", [&](auto& v) { c.k_theta = deg2rad(v[0]); }},
      {"k_vartheta_deg", [&](auto& v) { c.k_vartheta = deg2rad(v[0]); }},
      {"init_pos_halfwidth_m", [&](auto& v) { s.prior.pos_half_width = v[0]; }},
      {"init_vel_halfwidth_mps", [&](auto& v) { s.prior.vel_half_width = v[0]; }},
  };

  std::string section;
  std::string raw;
  std::size_t line = 0;
  std::vector<PendingSurface> pending;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError(line, "section", "unterminated section header");
      section = text.substr(1, text.size() - 2);
      if (section != "constants" && section != "pa" && section != "surface" && section != "trajectory")
        throw ParseError(line, "section", "unknown section '" + section + "'");
      continue;
    }
    if (section.empty()) throw ParseError(line, "section", "data before any section header");

    if (section == "constants") {
      const auto eq = text.find('=');
      if (eq == std::string::npos) throw ParseError(line, text, "expected key = value");
      const std::string key = trim(text.substr(0, eq));
      const auto toks = split_ws(text.substr(eq + 1));
      if (toks.empty()) throw ParseError(line, key, "missing value");
      if (key == "birth_region_m") {
        if (toks.size() != 3) throw ParseError(line, key, "expected: center_x center_y half_width");
        s.birth_region.center = Vec2(to_double(toks[0], line, key), to_double(toks[1], line, key));
        s.birth_region.half_width = to_double(toks[2], line, key);
        continue;
      }
      auto it = scalar.find(key);
      if (it == scalar.end()) throw ParseError(line, key, "unknown constant");
      if (toks.size() != 1) throw ParseError(line, key, "expected a single value");
      it->second({to_double(toks[0], line, key)});
    } else if (section == "pa") {
      const auto v = row_values(split_ws(text), kPaFields, 0, line);
      PaSpec p;
      p.anchor.position = Vec2(v[0], v[1]);
      p.psi = dispersion_from(v[2], v[3], v[4], line, kPaFields, 2);
      s.pas.push_back(p);
    } else if (section == "surface") {
      const auto v = row_values(split_ws(text), kSurfaceFields, 2, line);
      PendingSurface ps;
      ps.a = Vec2(v[0], v[1]);
      ps.b = Vec2(v[2], v[3]);
      ps.psi = dispersion_from(v[4], v[5], v[6], line, kSurfaceFields, 4);
      ps.line = line;
      if (v.size() == 9) {
        ps.has_normal = true;
        ps.normal = Vec2(v[7], v[8]);
        if (std::abs(ps.normal.norm() - 1.0) > 1e-9) throw ParseError(line, "nx", "normal must be unit length");
        ps.normal.normalize();
        if (std::abs(ps.normal.dot(ps.b - ps.a)) > 1e-9 * (ps.b - ps.a).norm())
          throw ParseError(line, "nx", "normal not orthogonal to the segment");
      }
      if ((ps.b - ps.a).norm() <= 0.0) throw ParseError(line, "bx_m", "segment endpoints coincide");
      pending.push_back(ps);
    } else {
      const auto v = row_values(split_ws(text), kTrajectoryFields, 0, line);
      s.trajectory.push_back({Vec2(v[0], v[1]), Vec2(v[2], v[3])});
    }
  }

  const Vec2 inside = !s.pas.empty() ? s.pas.front().anchor.position
                                     : (!s.trajectory.empty() ? s.trajectory.front().position : Vec2::Zero());
  for (const auto& ps : pending) {
    SurfaceSpec spec;
    spec.psi = ps.psi;
    if (ps.has_normal)
      spec.surface = {ps.a, ps.b, ps.normal};
    else
      spec.surface = Surface::from_endpoints(ps.a, ps.b, inside);
    s.surfaces.push_back(spec);
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, "scenario", e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path.string());
  return parse_scenario(in);
}

void write_scenario(std::ostream& out, const Scenario& s) {
  const ModelConstants& c = s.constants;
  out << std::setprecision(17);
  out << "# mpslam scenario; distances in m, angles in degrees\n";
  out << "[constants]\n";
  out << "delta_t_s = " << c.delta_t << "\n";
  out << "snr_1m_db = " << c.snr_1m_db << "\n";
  out << "bandwidth_hz = " << c.bandwidth << "\n";
  out << "carrier_hz = " << c.carrier << "\n";
  out << "reflection_loss_db = " << c.reflection_loss_db << "\n";
  out << "beta_sub = " << c.beta_sub << "\n";
  out << "mu_fp = " << c.mu_fp << "\n";
  out << "p_d = " << c.p_d << "\n";
  out << "n_ny_tau = " << c.n_ny_tau << "\n";
  out << "n_ny_theta = " << c.n_ny_theta << "\n";
  out << "n_ny_vartheta = " << c.n_ny_vartheta << "\n";
  out << "gamma_det = " << c.gamma_det << "\n";
  out << "tau_max_s = " << c.tau_max << "\n";
  out << "beta_bw_hz = " << c.beta_bw << "\n";
  out << "k_theta_deg = " << rad2deg(c.k_theta) << "\n";
  out << "k_vartheta_deg = " << rad2deg(c.k_vartheta) << "\n";
  out << "init_pos_halfwidth_m = " << s.prior.pos_half_width << "\n";
  out << "init_vel_halfwidth_mps = " << s.prior.vel_half_width << "\n";
  out << "birth_region_m = " << s.birth_region.center.x() << " " << s.birth_region.center.y() << " "
      << s.birth_region.half_width << "\n";
  auto psi = [&](const Dispersion& d) {
    out << d.tau * kSpeedOfLight << " " << rad2deg(d.theta) << " " << rad2deg(d.vartheta);
  };
  out << "\n[pa]\n# x_m y_m psi_d_m psi_theta_deg psi_vartheta_deg\n";
  for (const auto& p : s.pas) {
    out << p.anchor.position.x() << " " << p.anchor.position.y() << " ";
    psi(p.psi);
    out << "\n";
  }
  out << "\n[surface]\n# ax_m ay_m bx_m by_m psi_d_m psi_theta_deg psi_vartheta_deg nx ny\n";
  for (const auto& w : s.surfaces) {
    out << w.surface.a.x() << " " << w.surface.a.y() << " " << w.surface.b.x() << " " << w.surface.b.y() << " ";
    psi(w.psi);
    out << " " << w.surface.normal.x() << " " << w.surface.normal.y() << "\n";
  }
  out << "\n[trajectory]\n# px_m py_m vx_mps vy_mps\n";
  for (const auto& p : s.trajectory)
    out << p.position.x() << " " << p.position.y() << " " << p.velocity.x() << " " << p.velocity.y() << "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path.string());
  write_scenario(out, s);
}

void write_frames(std::ostream& out, const std::vector<MeasurementFrame>& frames) {
  out << "t,pa,z_tau_s,z_theta_rad,z_vartheta_rad,z_u,origin_label\n";
  out << std::setprecision(17);
  for (const auto& f : frames)
    for (std::size_t j = 0; j < f.per_pa.size(); ++j)
      for (std::size_t i = 0; i < f.per_pa[j].size(); ++i) {
        const auto& z = f.per_pa[j][i];
        const std::string label = i < f.origins[j].size() ? f.origins[j][i].str() : "unknown";
        out << f.t << "," << j << "," << z.tau << "," << z.theta << "," << z.vartheta << "," << z.u << ","
            << label << "\n";
      }
}

void save_frames(const std::vector<MeasurementFrame>& frames, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write frame dump: " + path.string());
  write_frames(out, frames);
}

}  // namespace mpslam
