# Copyright 2026 The enasfarm Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Python bindings for enasfarm.

The heavy lifting happens in the C++ library; this package re-exports it.
"""

from ._enasfarm import (  # noqa: F401
    ConfigError,
    EnasfarmError,
    MixedSettingsError,
    ParseError,
    ReportError,
    RestartError,
    Session,
    arch_stats,
    canonical,
    compare,
    identifier,
    strategies,
    surrogate_percent,
)

__version__ = "0.1.0"
