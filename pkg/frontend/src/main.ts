/**
 * Browser bootstrap: wires the forms and result clicks to the session
 * controller and re-renders the panels after every acknowledged event.
 * Everything interesting happens in session.ts/view.ts; this file is the
 * only one that touches the DOM.
 */
import { ApiClient, NetworkError } from "./api.js";
import { SessionController } from "./session.js";
import {
  renderErrorBanner,
  renderOfflineBanner,
  renderStateSafely,
} from "./view.js";

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? window.location.origin;
}

function mount(): void {
  const root = document.getElementById("session-root");
  const banner = document.getElementById("banner");
  const dialogueForm = document.getElementById("dialogue-form") as HTMLFormElement;
  const queryForm = document.getElementById("query-form") as HTMLFormElement;
  const profileForm = document.getElementById("profile-form") as HTMLFormElement;
  if (!root || !banner) {
    throw new Error("console markup is missing its containers");
  }

  const api = new ApiClient(baseUrl());
  let controller: SessionController | null = null;

  const render = () => {
    banner.innerHTML = controller && controller.offline
      ? renderOfflineBanner(controller.pending.length)
      : "";
    if (controller) {
      root.innerHTML = renderStateSafely(controller.state, controller.lastResult);
    }
  };

  const guard = (work: () => Promise<unknown>) => {
    work()
      .catch((err) => {
        banner.innerHTML = err instanceof NetworkError
          ? renderOfflineBanner(controller?.pending.length ?? 0)
          : renderErrorBanner(String(err));
      })
      .finally(render);
  };

  const start = () =>
    SessionController.open(api, "console")
      .then((opened) => {
        controller = opened;
        render();
      })
      .catch(() => {
        banner.innerHTML = renderErrorBanner("cannot reach the search service");
      });

  dialogueForm.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const input = dialogueForm.elements.namedItem("utterance") as HTMLInputElement;
    const text = input.value.trim();
    if (controller && text) {
      input.value = "";
      guard(() => controller!.submitDialogue(text));
    }
  });

  queryForm.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const input = queryForm.elements.namedItem("query") as HTMLInputElement;
    const text = input.value.trim();
    if (controller && text) {
      guard(() => controller!.submitQuery(text));
    }
  });

  profileForm.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const slot = (profileForm.elements.namedItem("slot") as HTMLInputElement).value.trim();
    const value = (profileForm.elements.namedItem("value") as HTMLInputElement).value.trim();
    if (controller && slot && value) {
      guard(() => controller!.submitProfileEdit(slot, value));
    }
  });

  // Result clicks and banner retries, by delegation.
  document.body.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const docId = target.getAttribute("data-doc-id");
    if (docId && controller) {
      guard(() => controller!.clickResult(docId));
      return;
    }
    if (target.getAttribute("data-action") === "retry") {
      if (controller) {
        guard(() => controller!.flushPending());
      } else {
        start();
      }
    }
  });

  start();
}

document.addEventListener("DOMContentLoaded", mount);
