// Small display helpers shared by the renderers. All pure.

const HTML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function escapeHtml(value: unknown): string {
  return String(value).replace(/[&<>"']/g, (ch) => HTML_ESCAPES[ch]);
}

/** Simulation seconds as h:mm:ss. */
export function fmtClock(seconds: number): string {
  const s = Math.max(0, Math.floor(seconds));
  const h = Math.floor(s / 3600);
  const m = Math.floor((s % 3600) / 60);
  const r = s % 60;
  return `${h}:${String(m).padStart(2, "0")}:${String(r).padStart(2, "0")}`;
}

export function fmtNum(value: number, digits = 3): string {
  return value.toFixed(digits);
}

/** Request parameter values, itemized: arrays joined, objects inlined. */
export function fmtParamValue(value: unknown): string {
  if (Array.isArray(value)) {
    return value.map((v) => fmtParamValue(v)).join(", ");
  }
  if (value !== null && typeof value === "object") {
    return JSON.stringify(value);
  }
  return String(value);
}
