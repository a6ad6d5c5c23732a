"""System prompt assembly.

The prompt the provider sees carries: artifact-generation instructions, the
tool inventory, the private-data *keys* (never values), and the usage spec
for the quarantined model call and multishot handoff. Rendering is
deterministic for fixed inputs.
"""

from __future__ import annotations

from ..broker.mocks import ToolDescriptor

_INSTRUCTIONS = """\
You are operating inside a guarded execution environment. Respond to every
task with one AgentScript code artifact and nothing else.

AgentScript is a small Python-like language: assignments, if/else, for
loops over lists and maps, string interpolation f"..{expr}..", list and map
literals, indexing, comparison and boolean operators. There are no imports,
no function definitions, no while loops, and no exception handling.

Builtins:
  priv_data_db.access_<key>()   read a private value by key
  priv_data_db.new_value(key)   ask the user to store a new private value
  mcp_helper.connect(name)      connect to a tool server (alias: mcp_server)
  handle.process_query(tool, args={...})   call a tool
  qllm(prompt=..., return_type="bool|int|float|string", data=...)
  multishot(query)              disclose query and continue in a new artifact
  log(value)                    print to the user's transcript

Private values never appear in this prompt; reference them by key and read
them at runtime. Every disclosure of private data to an external party is
checked against the user's permissions and may be denied.
"""

_MODEL_TOOLS = """\
Model tools:
  qllm(prompt, return_type, data) sends prompt and data to the quarantined
  model and returns a typed value; its output carries the taints of its
  inputs. multishot(query) ends the current artifact; the model reads the
  authorized query text and produces the next artifact.
"""


def render_system_prompt(
    pdb_keys: list[str],
    server_tools: dict[str, list[ToolDescriptor]],
) -> str:
    sections = [_INSTRUCTIONS]

    lines = ["Available tool servers:"]
    for server in sorted(server_tools):
        lines.append(f"  {server}:")
        for tool in sorted(server_tools[server], key=lambda t: t.name):
            args = ", ".join(
                f"{name}{'' if spec.get('required') else '?'}: {spec.get('kind', 'scalar')}"
                for name, spec in sorted(tool.args.items())
            )
            description = f" — {tool.description}" if tool.description else ""
            lines.append(f"    {tool.name}({args}){description}")
    sections.append("\n".join(lines) + "\n")

    if pdb_keys:
        keys = "\n".join(f"  {key}" for key in sorted(pdb_keys))
        sections.append(f"Private data keys currently stored:\n{keys}\n")
    else:
        sections.append("The private data store is empty; use new_value to add keys.\n")

    sections.append(_MODEL_TOOLS)
    return "\n".join(sections)
