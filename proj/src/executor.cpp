// Copyright 2026 The enasfarm Authors.
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


#include "enasfarm/executor.hpp"

#include <sstream>

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

FarmAccounting& FarmAccounting::operator+=(const FarmAccounting& o) {
  jobs += o.jobs;
  attempts += o.attempts;
  failed += o.failed;
  busy_seconds += o.busy_seconds;
  wall_seconds += o.wall_seconds;
  return *this;
}

std::string FarmAccounting::serialize() const {
  std::ostringstream os;
  os << "jobs=" << jobs << '\n'
     << "attempts=" << attempts << '\n'
     << "failed=" << failed << '\n'
     << "busy_seconds=" << format_fixed(busy_seconds, 6) << '\n'
     << "wall_seconds=" << format_fixed(wall_seconds, 6) << '\n';
  return os.str();
}

FarmAccounting FarmAccounting::parse(const std::string& text) {
  FarmAccounting a;
  for (const auto& line : split(text, '\n')) {
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw PersistError("farm accounting: malformed line '" + line + "'");
    const auto key = line.substr(0, eq);
    const auto value = line.substr(eq + 1);
    auto as_int = [&] {
      const auto v = parse_int(value);
      if (!v) throw PersistError("farm accounting: bad " + key);
      return *v;
    };
    auto as_real = [&] {
      const auto v = parse_double(value);
      if (!v) throw PersistError("farm accounting: bad " + key);
      return *v;
    };
    if (key == "jobs") a.jobs = as_int();
    else if (key == "attempts") a.attempts = as_int();
    else if (key == "failed") a.failed = as_int();
    else if (key == "busy_seconds") a.busy_seconds = as_real();
    else if (key == "wall_seconds") a.wall_seconds = as_real();
    else throw PersistError("farm accounting: unknown key " + key);
  }
  return a;
}

}  // namespace enasfarm
