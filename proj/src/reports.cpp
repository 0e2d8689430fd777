#include <string>

#include "casar/dataset_io.hpp"
#include "casar/evaluation.hpp"

namespace casar {

using ordered_json = nlohmann::ordered_json;

void write_eval_report(const std::filesystem::path& dir, const EvalReport& report,
                       const ordered_json& provenance) {
  std::filesystem::create_directories(dir);

  ordered_json metrics;
  metrics["top1_accuracy"] = report.top1_accuracy;
  metrics["clip_count"] = report.predictions.size();
  metrics["correct"] = report.confusion.trace();
  if (report.has_contact_table) {
    metrics["contact_accuracy_avg"] = report.contact_table.average.contact_accuracy;
    metrics["distant_accuracy_avg"] = report.contact_table.average.distant_accuracy;
    metrics["contact_frames"] = report.contact_table.average.frames;
  }
  metrics["provenance"] = provenance;
  write_text_atomic(dir / "metrics.json", metrics.dump(2) + "\n");

  const int c = report.confusion.classes();
  std::string csv = "truth";
  for (int j = 0; j < c; ++j) csv += "," + std::to_string(j);
  csv += "\n";
  for (int i = 0; i < c; ++i) {
    csv += std::to_string(i);
    for (int j = 0; j < c; ++j) csv += "," + std::to_string(report.confusion.at(i, j));
    csv += "\n";
  }
  write_text_atomic(dir / "confusion.csv", csv);

  std::string per_object = "object_label,contact_acc,distant_acc,frames\n";
  if (report.has_contact_table) {
    auto line = [](const std::string& label, const ContactAccuracyRow& r) {
      return label + "," + format_double(r.contact_accuracy) + "," +
             format_double(r.distant_accuracy) + "," + std::to_string(r.frames) + "\n";
    };
    for (const auto& r : report.contact_table.rows) {
      per_object += line(std::to_string(r.object_label), r);
    }
    per_object += line("average", report.contact_table.average);
  }
  write_text_atomic(dir / "per_object.csv", per_object);
}

void write_ablation_report(const std::filesystem::path& dir, const AblationReport& report,
                           const ordered_json& provenance) {
  std::filesystem::create_directories(dir);
  std::string csv = "variant,contact_points,distant_points,train_accuracy,test_accuracy\n";
  ordered_json rows = ordered_json::array();
  for (const AblationRow& r : report.rows) {
    csv += r.variant + "," + (r.contact_points ? "1" : "0") + "," +
           (r.distant_points ? "1" : "0") + "," + format_double(r.train_accuracy) + "," +
           format_double(r.test_accuracy) + "\n";
    ordered_json j;
    j["variant"] = r.variant;
    j["contact_points"] = r.contact_points;
    j["distant_points"] = r.distant_points;
    j["train_accuracy"] = r.train_accuracy;
    j["test_accuracy"] = r.test_accuracy;
    rows.push_back(std::move(j));
  }
  write_text_atomic(dir / "ablation.csv", csv);

  ordered_json doc;
  doc["rows"] = std::move(rows);
  doc["contact_accuracy_avg"] = report.contact_table.average.contact_accuracy;
  doc["distant_accuracy_avg"] = report.contact_table.average.distant_accuracy;
  doc["provenance"] = provenance;
  write_text_atomic(dir / "ablation.json", doc.dump(2) + "\n");
}

}  // namespace casar
