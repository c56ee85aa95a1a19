/** API base URL: one env-style variable, settable before the bundle loads
 *  (e.g. `<script>globalThis.EVIDENT_API_BASE = "http://host:8787"</script>`). */

export const DEFAULT_API_BASE = "http://127.0.0.1:8787";

export function apiBase(): string {
  const configured = (globalThis as Record<string, unknown>)["EVIDENT_API_BASE"];
  if (typeof configured === "string" && configured.length > 0) {
    return configured.replace(/\/$/, "");
  }
  return DEFAULT_API_BASE;
}
