#pragma once

#include <string>

#include "repsel/types.hpp"

namespace repsel {

enum class FileFormat { csv, json };

FileFormat format_from_path(const std::string& path);

/// CSV: header `human_id,<task>,...`; cells 0/1 (binary) or reals in [-1,1]
/// (ordinal); no split information, so all tasks land on the train side.
/// JSON: {scheme, tasks, humans:[{id, responses}], split:{train, test}} with
/// optional d_max / aggregator / cluster_labels. Completeness is enforced;
/// every violation names its (row, column) or (human, task) location.
Population load_population(const std::string& path, FileFormat format);
Population load_population(const std::string& path);  // format from extension

void save_population(const Population& pop, const std::string& path);  // JSON document

}  // namespace repsel
