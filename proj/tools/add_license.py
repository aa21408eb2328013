#!/usr/bin/env python3
# Copyright 2026 The ULK Authors
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

"""Prepends the Apache-2.0 header to project sources. Idempotent."""

import pathlib
import sys

HEADER = """Copyright 2026 The ULK Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License."""

ROOTS = ["include", "src", "tests", "tools"]
TOP = ["CMakeLists.txt"]


def commented(prefix):
    return "\n".join((prefix + " " + line).rstrip() for line in HEADER.splitlines()) + "\n\n"


def style(path):
    if path.suffix in (".h", ".cc", ".hpp", ".cpp"):
        return "//"
    if path.suffix in (".py", ".cmake") or path.name == "CMakeLists.txt":
        return "#"
    return None


def main():
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    files = [root / t for t in TOP]
    for r in ROOTS:
        files += sorted(p for p in (root / r).rglob("*") if p.is_file())
    for path in files:
        prefix = style(path)
        if prefix is None:
            continue
        text = path.read_text()
        if commented(prefix).splitlines()[0] in text[:200]:
            continue
        shebang = ""
        if text.startswith("#!"):
            shebang, _, text = text.partition("\n")
            shebang += "\n"
        path.write_text(shebang + commented(prefix) + text)


if __name__ == "__main__":
    main()
