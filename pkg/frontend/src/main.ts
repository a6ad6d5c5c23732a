/** Browser shell: binds the console app to the pane elements. */

import { ConsoleApp } from "./app.js";
import {
  renderBatchCard,
  renderDisclosures,
  renderKeys,
  renderPermissions,
  renderTranscript,
  renderValueCard,
} from "./render.js";
import type { Choice } from "./types.js";

function requireElement(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing element #${id}`);
  return element;
}

export function mount(): void {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("api") ?? window.location.origin;
  const token =
    params.get("token") ?? window.sessionStorage.getItem("console-token") ?? "";
  if (!token) {
    document.body.innerHTML =
      "<p>Provide the console token via <code>?token=...</code> " +
      "(it is kept in session storage).</p>";
    return;
  }
  window.sessionStorage.setItem("console-token", token);

  const app = new ConsoleApp({ baseUrl, token });
  const inboxPane = requireElement("inbox");
  const permissionsPane = requireElement("permissions");
  const disclosuresPane = requireElement("disclosures");
  const keysPane = requireElement("keys");
  const transcriptPane = requireElement("transcript");
  const statusPane = requireElement("stream-state");

  const redrawInbox = () => {
    const cards = [
      ...app.inbox.openValues().map(renderValueCard),
      ...app.inbox.openBatches().map(renderBatchCard),
    ];
    inboxPane.innerHTML = cards.length
      ? cards.join("")
      : "<p>Nothing waiting for you.</p>";
  };
  app.inbox.onChange(redrawInbox);
  app.permissions.onChange(() => {
    permissionsPane.innerHTML = renderPermissions(app.permissions.records);
  });
  app.disclosures.onChange(() => {
    disclosuresPane.innerHTML = renderDisclosures(app.disclosures.records);
  });
  app.keys.onChange(() => {
    keysPane.innerHTML = renderKeys(app.keys.keys);
  });
  app.transcript.onChange(() => {
    transcriptPane.innerHTML = renderTranscript(app.transcript.events);
  });
  app.stream.onState((state) => {
    statusPane.textContent = state;
    statusPane.className = `state-${state}`;
  });

  inboxPane.addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    if (input.type !== "radio") return;
    const row = input.closest("tr[data-pair]");
    const card = input.closest("article.batch");
    if (!row || !card) return;
    app.inbox.setChoice(
      card.getAttribute("data-batch") ?? "",
      Number(row.getAttribute("data-pair")),
      input.value as Choice,
    );
  });

  inboxPane.addEventListener("click", (event) => {
    const button = event.target as HTMLElement;
    const batchCard = button.closest("article.batch");
    if (button.classList.contains("submit") && batchCard) {
      void app.inbox.submitBatch(batchCard.getAttribute("data-batch") ?? "");
      return;
    }
    const valueCard = button.closest("article.value-request");
    if (!valueCard) return;
    const requestId = valueCard.getAttribute("data-request") ?? "";
    if (button.classList.contains("store")) {
      const input = valueCard.querySelector<HTMLInputElement>(".value-input");
      if (input && input.value) {
        void app.inbox.submitValue(requestId, input.value);
        input.value = "";
      }
    } else if (button.classList.contains("refuse")) {
      void app.inbox.submitValue(requestId, null);
    }
  });

  permissionsPane.addEventListener("click", (event) => {
    const button = event.target as HTMLElement;
    if (!button.classList.contains("revoke")) return;
    void app.permissions.revoke(
      button.getAttribute("data-item") ?? "",
      button.getAttribute("data-entity") ?? "",
    );
  });

  keysPane.addEventListener("click", (event) => {
    const button = event.target as HTMLElement;
    if (button.classList.contains("delete")) {
      void app.keys.remove(button.getAttribute("data-key") ?? "");
    }
  });
  keysPane.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    if (!form.classList.contains("add-key")) return;
    event.preventDefault();
    const key = (form.elements.namedItem("key") as HTMLInputElement).value;
    const value = (form.elements.namedItem("value") as HTMLInputElement).value;
    if (key && value) {
      void app.keys.setValue(key, value);
      form.reset();
    }
  });

  void app.start();
  redrawInbox();
}

if (typeof document !== "undefined" && document.getElementById("inbox")) {
  mount();
}
