#pragma once

namespace driftwin::io {

// Subcommands simulate, ingest-run, battery and report. Returns 0 on success,
// 2 for usage and configuration errors, 1 for failures while running.
int cli_main(int argc, char** argv);

}  // namespace driftwin::io
