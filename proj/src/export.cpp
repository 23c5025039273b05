#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <vector>

#include "bess/errors.hpp"
#include "bess/formulation.hpp"
#include "csv.hpp"

namespace bess {

namespace {

using csv::format_double;

// Field widths of the classic fixed layout; longer names simply push the
// following fields right, which every free-form aware reader accepts.
void mps_field(std::ostream& out, const std::string& s, std::size_t width) {
  out << s;
  for (std::size_t i = s.size(); i < width; ++i) out << ' ';
  out << ' ';
}

char mps_row_type(Sense sense) {
  switch (sense) {
    case Sense::LessEqual:
      return 'L';
    case Sense::Equal:
      return 'E';
    case Sense::GreaterEqual:
      return 'G';
  }
  return 'L';
}

struct ColumnEntries {
  std::vector<std::pair<int, double>> rows;  // row index, coefficient
};

std::vector<ColumnEntries> by_column(const MilpModel& model) {
  std::vector<ColumnEntries> cols(model.variables().size());
  const auto rows = model.constraints();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Term& t : rows[i].terms) cols[t.var].rows.emplace_back(static_cast<int>(i), t.coef);
  }
  return cols;
}

}  // namespace

void write_mps(const MilpModel& model, std::ostream& out) {
  const auto vars = model.variables();
  const auto rows = model.constraints();
  const auto obj = model.objective();
  const auto cols = by_column(model);
  constexpr const char* kObj = "OBJ";

  out << "NAME          BESSBIDS\n";
  out << "OBJSENSE\n    MAX\n";
  out << "ROWS\n";
  out << " N  " << kObj << '\n';
  for (const LinearConstraint& r : rows) out << ' ' << mps_row_type(r.sense) << "  " << r.name << '\n';

  out << "COLUMNS\n";
  bool in_integer_block = false;
  int marker = 0;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const bool integer = vars[j].domain == Domain::Binary;
    if (integer != in_integer_block) {
      out << "    MARKER" << marker++ << "  'MARKER'  " << (integer ? "'INTORG'" : "'INTEND'") << '\n';
      in_integer_block = integer;
    }
    const std::string& name = vars[j].name;
    if (obj[j] != 0.0 || cols[j].rows.empty()) {
      out << "    ";
      mps_field(out, name, 8);
      mps_field(out, kObj, 8);
      out << format_double(obj[j]) << '\n';
    }
    for (const auto& [row, coef] : cols[j].rows) {
      out << "    ";
      mps_field(out, name, 8);
      mps_field(out, rows[row].name, 8);
      out << format_double(coef) << '\n';
    }
  }
  if (in_integer_block) out << "    MARKER" << marker++ << "  'MARKER'  'INTEND'\n";

  out << "RHS\n";
  for (const LinearConstraint& r : rows) {
    if (r.rhs == 0.0) continue;
    out << "    ";
    mps_field(out, "RHS", 8);
    mps_field(out, r.name, 8);
    out << format_double(r.rhs) << '\n';
  }

  out << "BOUNDS\n";
  auto bound = [&](const char* type, const std::string& name, std::optional<double> value) {
    out << ' ' << type << ' ';
    mps_field(out, "BND", 8);
    if (value) {
      mps_field(out, name, 8);
      out << format_double(*value) << '\n';
    } else {
      out << name << '\n';
    }
  };
  for (const Variable& v : vars) {
    const bool lb_inf = std::isinf(v.lb);
    const bool ub_inf = std::isinf(v.ub);
    if (!lb_inf && !ub_inf && v.lb == v.ub) {
      bound("FX", v.name, v.lb);
      continue;
    }
    if (lb_inf && ub_inf) {
      bound("FR", v.name, std::nullopt);
      continue;
    }
    if (lb_inf) {
      bound("MI", v.name, std::nullopt);
    } else if (v.lb != 0.0) {
      bound("LO", v.name, v.lb);
    }
    if (!ub_inf) bound("UP", v.name, v.ub);
  }
  out << "ENDATA\n";
}

namespace {

class LpLine {
 public:
  explicit LpLine(std::ostream& out) : out_(out) {}

  void term(double coef, const std::string& name) {
    if (count_ > 0 && count_ % 6 == 0) out_ << "\n   ";
    out_ << (coef < 0.0 ? " - " : " + ") << format_double(std::abs(coef)) << ' ' << name;
    ++count_;
  }

 private:
  std::ostream& out_;
  int count_ = 0;
};

}  // namespace

void write_lp(const MilpModel& model, std::ostream& out) {
  const auto vars = model.variables();
  const auto obj = model.objective();

  out << "\\ battery market participation model\n";
  out << "Maximize\n obj:";
  {
    LpLine line(out);
    bool any = false;
    for (std::size_t j = 0; j < vars.size(); ++j) {
      if (obj[j] == 0.0) continue;
      line.term(obj[j], vars[j].name);
      any = true;
    }
    if (!any && !vars.empty()) out << " 0 " << vars.front().name;
  }
  out << "\nSubject To\n";
  for (const LinearConstraint& r : model.constraints()) {
    out << ' ' << r.name << ':';
    LpLine line(out);
    for (const Term& t : r.terms) line.term(t.coef, vars[t.var].name);
    const char* op = r.sense == Sense::LessEqual ? " <= " : r.sense == Sense::Equal ? " = " : " >= ";
    out << op << format_double(r.rhs) << '\n';
  }

  out << "Bounds\n";
  std::vector<std::string> binaries;
  std::vector<std::string> generals;
  for (const Variable& v : vars) {
    const bool lb_inf = std::isinf(v.lb);
    const bool ub_inf = std::isinf(v.ub);
    if (v.domain == Domain::Binary) {
      if (v.lb == 0.0 && v.ub == 1.0) {
        binaries.push_back(v.name);
        continue;
      }
      generals.push_back(v.name);
    }
    if (lb_inf && ub_inf) {
      out << ' ' << v.name << " free\n";
    } else if (!lb_inf && !ub_inf && v.lb == v.ub) {
      out << ' ' << v.name << " = " << format_double(v.lb) << '\n';
    } else if (lb_inf) {
      out << " -inf <= " << v.name << " <= " << format_double(v.ub) << '\n';
    } else if (!ub_inf) {
      out << ' ' << format_double(v.lb) << " <= " << v.name << " <= " << format_double(v.ub) << '\n';
    } else if (v.lb != 0.0) {
      out << ' ' << v.name << " >= " << format_double(v.lb) << '\n';
    }
  }
  if (!generals.empty()) {
    out << "Generals\n";
    for (const auto& n : generals) out << ' ' << n << '\n';
  }
  if (!binaries.empty()) {
    out << "Binaries\n";
    for (const auto& n : binaries) out << ' ' << n << '\n';
  }
  out << "End\n";
}

void export_model(const MilpModel& model, ExportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == ExportFormat::Mps) {
    write_mps(model, out);
  } else {
    write_lp(model, out);
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace bess
