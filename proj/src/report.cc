#include "panogeo/report.h"

#include <sstream>
#include <vector>

#include "panogeo/error.h"

namespace panogeo {

namespace {

OrderedJson header(const char* kind) {
  OrderedJson j;
  j["tool"] = "panogeo";
  j["version"] = kToolVersion;
  j["report"] = kind;
  return j;
}

OrderedJson matrix_json(const Mat3& m) {
  OrderedJson rows = OrderedJson::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

void flatten(const OrderedJson& j, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object() && !j.empty()) {
    for (const auto& [key, value] : j.items()) {
      if (key.find('.') != std::string::npos) throw ContractError("report keys cannot contain '.'");
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    }
    return;
  }
  out.emplace_back(prefix, j.dump());
}

std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string q = "\"";
  for (char c : cell) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  if (quoted) throw FormatError("unterminated quote in CSV");
  return cells;
}

}  // namespace

OrderedJson report_json(const MetricsReport& r) {
  OrderedJson j = header("metrics");
  OrderedJson details = OrderedJson::object();
  if (r.pose) {
    const PoseMetrics& p = *r.pose;
    j["pose"] = {{"auc30", p.auc30 ? OrderedJson(*p.auc30) : OrderedJson(nullptr)},
                 {"rot_mean", p.rot_mean},
                 {"rot_med", p.rot_med},
                 {"trans_mean", p.trans_mean},
                 {"trans_med", p.trans_med}};
    details["pose"] = {{"valid_pairs", p.valid_pairs}, {"filtered_pairs", p.filtered_pairs}};
  }
  if (r.depth) {
    const DepthMetrics& d = *r.depth;
    j["depth"] = {{"abs_rel", d.abs_rel}, {"rmse", d.rmse}, {"delta1", d.delta1},
                  {"delta2", d.delta2}};
    details["depth"] = {{"count", d.count},
                        {"dropped_nonpositive_gt", d.dropped_nonpositive_gt},
                        {"scale", d.scale},
                        {"shift", d.shift}};
  }
  if (r.pc) {
    const PcMetrics& p = *r.pc;
    j["pc"] = {{"acc_mean", p.acc_mean},         {"acc_med", p.acc_med},
               {"comp_mean", p.comp_mean},       {"comp_med", p.comp_med},
               {"overall_mean", p.overall_mean}, {"overall_med", p.overall_med}};
    OrderedJson pc = {{"pred_points", p.pred_points}, {"gt_points", p.gt_points}};
    if (p.alignment) {
      pc["alignment"] = {{"scale", p.alignment->scale},
                         {"rot", matrix_json(p.alignment->rot.matrix())},
                         {"trans", {p.alignment->trans.x(), p.alignment->trans.y(),
                                    p.alignment->trans.z()}}};
    }
    details["pc"] = pc;
  }
  j["details"] = details;
  j["provenance"] = r.provenance;
  return j;
}

OrderedJson report_json(const LossReport& r, const OrderedJson& provenance) {
  OrderedJson j = header("loss");
  j["loss"] = {{"lp", r.lp},   {"gp", r.gp},       {"nor", r.nor},      {"rot", r.rot},
               {"trans", r.trans}, {"total", r.total}, {"s_star", r.s_star}};
  j["details"] = {{"lambda_t", r.weights.lambda_t},
                  {"lambda_g", r.weights.lambda_g},
                  {"local_points", r.local_points},
                  {"global_points", r.global_points},
                  {"normal_pixels", r.normal_pixels},
                  {"pose_pairs", r.pose_pairs},
                  {"normal_set_empty", r.normal_set_empty}};
  j["provenance"] = provenance;
  return j;
}

std::string to_csv(const OrderedJson& report) {
  std::vector<std::pair<std::string, std::string>> cells;
  flatten(report, "", cells);
  std::string head, row;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) {
      head += ',';
      row += ',';
    }
    head += csv_quote(cells[i].first);
    row += csv_quote(cells[i].second);
  }
  return head + "\n" + row + "\n";
}

OrderedJson csv_to_json(const std::string& csv) {
  std::istringstream in(csv);
  std::string head_line, row_line;
  if (!std::getline(in, head_line) || !std::getline(in, row_line)) {
    throw FormatError("CSV report needs a header and a value row");
  }
  const auto keys = csv_split(head_line);
  const auto values = csv_split(row_line);
  if (keys.size() != values.size()) throw FormatError("CSV header/value count mismatch");
  OrderedJson j = OrderedJson::object();
  for (size_t i = 0; i < keys.size(); ++i) {
    OrderedJson* node = &j;
    std::string path = keys[i];
    size_t pos;
    while ((pos = path.find('.')) != std::string::npos) {
      node = &(*node)[path.substr(0, pos)];
      path = path.substr(pos + 1);
    }
    try {
      (*node)[path] = OrderedJson::parse(values[i]);
    } catch (const nlohmann::json::exception&) {
      throw FormatError("bad CSV cell for " + keys[i]);
    }
  }
  return j;
}

std::string serialize(const OrderedJson& report, ReportFormat format) {
  return format == ReportFormat::kCsv ? to_csv(report) : report.dump(2) + "\n";
}

}  // namespace panogeo
