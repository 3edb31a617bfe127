// Page entry point: mount the console against the service base URL.
// Override the default with ?base=http://host:port in the address bar.

import { mountConsole } from "./main.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("base") ?? "http://127.0.0.1:8733";
const root = document.getElementById("app");
if (root) {
  mountConsole(root, { base });
}
