/** Service entry point: `node dist/server.js [--port 8411] [--host 127.0.0.1]`. */

import { createApp } from "./app";

function argValue(name: string, fallback: string): string {
  const idx = process.argv.indexOf(`--${name}`);
  return idx >= 0 && process.argv[idx + 1] ? process.argv[idx + 1] : fallback;
}

const port = Number(argValue("port", "8411"));
const host = argValue("host", "127.0.0.1");

const app = createApp();
app.listen(port, host, () => {
  // the pipeline's launcher greps for this marker line
  console.log(`sdservice listening on http://${host}:${port}`);
});
