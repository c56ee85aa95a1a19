import { ApiError, Client } from "./api.js";
import { loadView, submitContainer, submitPromotion, viewHtml } from "./app.js";
import { apiBase } from "./config.js";
import { renderError } from "./render.js";

const REFRESH_MS = 2000;

const client = new Client(apiBase());
const gridEl = document.getElementById("grid")!;
const backlogEl = document.getElementById("backlog")!;
const errorEl = document.getElementById("errors")!;
const promoteForm = document.getElementById("promote-form") as HTMLFormElement;

function showError(err: unknown): void {
  // Server errors verbatim; no optimistic state to roll back.
  if (err instanceof ApiError) {
    errorEl.innerHTML = renderError(err.code, err.message);
  } else {
    errorEl.innerHTML = renderError("Error", String(err));
  }
}

function clearError(): void {
  errorEl.innerHTML = "";
}

async function refresh(): Promise<void> {
  try {
    const state = await loadView(client);
    const html = viewHtml(state);
    gridEl.innerHTML = html.grid;
    backlogEl.innerHTML = html.backlog;
  } catch (err) {
    showError(err);
  }
}

function field(form: HTMLFormElement, name: string): string {
  const input = form.elements.namedItem(name) as HTMLInputElement | HTMLSelectElement | null;
  return input ? input.value : "";
}

function wireContainerForm(formId: string, kind: string, names: string[]): void {
  const form = document.getElementById(formId) as HTMLFormElement;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    clearError();
    const fields: Record<string, string> = {};
    for (const name of names) fields[name] = field(form, name);
    try {
      const id = await submitContainer(client, kind, fields);
      (form.querySelector(".created-id") as HTMLElement).textContent = id;
      form.reset();
      await refresh();
    } catch (err) {
      showError(err);
    }
  });
}

function wireLinkForm(): void {
  const form = document.getElementById("link-form") as HTMLFormElement;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    clearError();
    try {
      await client.link(field(form, "source"), field(form, "target"), field(form, "kind"));
      form.reset();
      await refresh();
    } catch (err) {
      showError(err);
    }
  });
}

function wireWinnerForm(): void {
  const form = document.getElementById("winner-form") as HTMLFormElement;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    clearError();
    try {
      await client.setWinner(field(form, "test"), field(form, "hypothesis"));
      form.reset();
      await refresh();
    } catch (err) {
      showError(err);
    }
  });
}

function wirePromotion(): void {
  // Clicking a badge in the PENDING column pre-fills the promotion dialog.
  gridEl.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest("button.promote");
    if (!button) return;
    const test = button.getAttribute("data-test") ?? "";
    (promoteForm.elements.namedItem("test") as HTMLInputElement).value = test;
    (promoteForm.querySelector(".dialog-hint") as HTMLElement).textContent =
      `Attaching an observation to ${test.slice(0, 19)}...`;
  });
  promoteForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    clearError();
    try {
      await submitPromotion(
        client,
        field(promoteForm, "test"),
        field(promoteForm, "observation"),
        field(promoteForm, "outcome"),
        field(promoteForm, "confidence"),
      );
      promoteForm.reset();
      await refresh();
    } catch (err) {
      showError(err);
    }
  });
}

wireContainerForm("hypothesis-form", "Hypothesis", ["text"]);
wireContainerForm("observation-form", "Observation", ["dataset", "digest"]);
wireContainerForm("test-form", "Test", ["method", "metric", "strategy", "outcome", "confidence"]);
wireLinkForm();
wireWinnerForm();
wirePromotion();

void refresh();
setInterval(() => void refresh(), REFRESH_MS);
