// Copyright 2026 The infolab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Text formats: JSON model and encoder specifications, dataset CSV, measure
// records, and the built-in reference models. Indices in every external
// format are 1-based.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "infolab/encoders.hpp"
#include "infolab/model.hpp"

namespace infolab {

ModelSpec parse_model_spec(const std::string& json_text);
HistogramModel parse_model(const std::string& json_text);

// Accepts a built-in name (see builtin_names) or a path to a JSON file.
HistogramModel load_model(const std::string& name_or_path);

std::string model_to_json(const HistogramModel& model);

std::vector<std::string> builtin_names();
bool is_builtin(const std::string& name);
HistogramModel builtin_model(const std::string& name);

// Encoder spec, e.g. {"type":"selector","coords":[1,3,5]}. Grids omitted
// from "cells" and "orbit" default to the model grid as seen by that layer.
Encoder parse_encoder(const std::string& json_text, const HistogramModel& model);

// Inline JSON when the text starts with '{', otherwise a file path.
Encoder load_encoder(const std::string& json_or_path, const HistogramModel& model);

std::string dataset_csv(const Dataset& data);

// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(const std::string& text);

struct MeasureRecord {
  std::string measure;
  double value_bits = 0.0;
  std::optional<double> std_error;
  std::string model_id;
  std::string encoder_id;
};

std::string measure_records_json(const std::vector<MeasureRecord>& records);

std::string read_file(const std::string& path);

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace infolab
