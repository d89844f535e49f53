#include "repsel/io.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace repsel {

using nlohmann::json;

FileFormat format_from_path(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return FileFormat::csv;
  return FileFormat::json;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

Population load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header[0]) != "human_id") {
    throw std::runtime_error(path + ": header must be 'human_id,<task>,...'");
  }
  std::vector<std::string> tasks(header.begin() + 1, header.end());
  for (auto& t : tasks) t = trim(t);

  std::vector<std::string> human_ids;
  std::vector<std::vector<double>> values;
  bool all_binary = true;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error(path + ": row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    }
    human_ids.push_back(trim(cells[0]));
    std::vector<double> row_values;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (cell.empty()) {
        throw std::runtime_error(path + ": missing response at row " + std::to_string(row) +
                                 ", column '" + tasks[c - 1] + "'");
      }
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || !std::isfinite(v)) {
        throw std::runtime_error(path + ": malformed value '" + cell + "' at row " +
                                 std::to_string(row) + ", column '" + tasks[c - 1] + "'");
      }
      if (v != 0.0 && v != 1.0) all_binary = false;
      if (v < -1.0 || v > 1.0) {
        throw std::runtime_error(path + ": value " + cell + " out of range at row " +
                                 std::to_string(row) + ", column '" + tasks[c - 1] + "'");
      }
      row_values.push_back(v);
    }
    values.push_back(std::move(row_values));
  }
  if (human_ids.empty()) throw std::runtime_error(path + ": no human rows");

  const Scheme scheme = all_binary ? Scheme::binary : Scheme::ordinal;
  std::vector<std::vector<ResponsePayload>> responses(human_ids.size());
  for (std::size_t h = 0; h < human_ids.size(); ++h) {
    responses[h].reserve(tasks.size());
    for (double v : values[h]) {
      if (scheme == Scheme::binary) {
        responses[h].push_back(BinaryAnswer{static_cast<int>(v)});
      } else {
        responses[h].push_back(OrdinalAnswer{v});
      }
    }
  }

  std::vector<std::size_t> train(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) train[t] = t;
  try {
    return Population::build(scheme, std::move(tasks), std::move(human_ids), std::move(responses),
                             std::move(train), {});
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

ResponsePayload payload_from_json(const json& j, Scheme scheme, const std::string& where) {
  switch (scheme) {
    case Scheme::binary:
      if (!j.is_number_integer()) {
        throw std::runtime_error(where + ": binary response must be an integer 0/1");
      }
      return BinaryAnswer{j.get<int>()};
    case Scheme::ordinal:
      if (!j.is_number()) throw std::runtime_error(where + ": ordinal response must be a number");
      return OrdinalAnswer{j.get<double>()};
    case Scheme::continuous: {
      if (!j.is_array() || j.empty()) {
        throw std::runtime_error(where + ": continuous response must be a nonempty array");
      }
      Eigen::VectorXd v(j.size());
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw std::runtime_error(where + ": continuous entries must be numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
      }
      return ContinuousAnswer{std::move(v)};
    }
  }
  throw std::logic_error("unreachable");
}

json payload_to_json(const ResponsePayload& payload) {
  if (const auto* b = std::get_if<BinaryAnswer>(&payload)) return b->value;
  if (const auto* o = std::get_if<OrdinalAnswer>(&payload)) return o->value;
  const auto& v = std::get<ContinuousAnswer>(payload).value;
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Population load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  if (!doc.contains("scheme") || !doc.contains("tasks") || !doc.contains("humans")) {
    throw std::runtime_error(path + ": document needs scheme, tasks and humans");
  }
  const Scheme scheme = scheme_from_string(doc["scheme"].get<std::string>());
  std::vector<std::string> tasks = doc["tasks"].get<std::vector<std::string>>();

  std::vector<std::string> human_ids;
  std::vector<std::vector<ResponsePayload>> responses;
  for (const auto& h : doc["humans"]) {
    const std::string id = h.at("id").get<std::string>();
    const auto& given = h.at("responses");
    std::vector<ResponsePayload> row;
    row.reserve(tasks.size());
    for (const auto& task : tasks) {
      if (!given.contains(task)) {
        throw std::runtime_error(path + ": human '" + id + "' is missing task '" + task + "'");
      }
      row.push_back(payload_from_json(given[task], scheme, "human '" + id + "', task '" + task + "'"));
    }
    if (given.size() != tasks.size()) {
      throw std::runtime_error(path + ": human '" + id + "' answers unknown tasks");
    }
    human_ids.push_back(id);
    responses.push_back(std::move(row));
  }

  std::vector<std::size_t> train_tasks;
  std::vector<std::size_t> test_tasks;
  auto index_of = [&](const std::string& task) -> std::size_t {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t] == task) return t;
    }
    throw std::runtime_error(path + ": split names unknown task '" + task + "'");
  };
  if (doc.contains("split")) {
    for (const auto& t : doc["split"].at("train")) train_tasks.push_back(index_of(t));
    for (const auto& t : doc["split"].at("test")) test_tasks.push_back(index_of(t));
  } else {
    for (std::size_t t = 0; t < tasks.size(); ++t) train_tasks.push_back(t);
  }

  ContinuousAggregator aggregator = ContinuousAggregator::mean;
  if (doc.contains("aggregator") && doc["aggregator"].get<std::string>() == "concat") {
    aggregator = ContinuousAggregator::concat;
  }
  std::optional<double> d_max;
  if (doc.contains("d_max")) d_max = doc["d_max"].get<double>();
  std::vector<int> labels;
  if (doc.contains("cluster_labels")) labels = doc["cluster_labels"].get<std::vector<int>>();

  try {
    return Population::build(scheme, std::move(tasks), std::move(human_ids), std::move(responses),
                             std::move(train_tasks), std::move(test_tasks), aggregator, d_max,
                             std::move(labels));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace

Population load_population(const std::string& path, FileFormat format) {
  return format == FileFormat::csv ? load_csv(path) : load_json(path);
}

Population load_population(const std::string& path) {
  return load_population(path, format_from_path(path));
}

void save_population(const Population& pop, const std::string& path) {
  json doc;
  doc["scheme"] = to_string(pop.scheme());
  doc["tasks"] = pop.tasks();
  doc["humans"] = json::array();
  for (const auto& h : pop.humans()) {
    json entry;
    entry["id"] = h.id;
    json resp = json::object();
    for (std::size_t t = 0; t < pop.n_tasks(); ++t) {
      resp[pop.task_id(t)] = payload_to_json(h.responses[t]);
    }
    entry["responses"] = std::move(resp);
    doc["humans"].push_back(std::move(entry));
  }
  json train = json::array();
  json test = json::array();
  for (std::size_t t : pop.train_tasks()) train.push_back(pop.task_id(t));
  for (std::size_t t : pop.test_tasks()) test.push_back(pop.task_id(t));
  doc["split"] = {{"train", std::move(train)}, {"test", std::move(test)}};
  if (pop.d_max_overridden()) doc["d_max"] = pop.d_max();
  if (pop.aggregator() == ContinuousAggregator::concat) doc["aggregator"] = "concat";
  if (!pop.cluster_labels().empty()) doc["cluster_labels"] = pop.cluster_labels();

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

}  // namespace repsel
