// DOM wiring for index.html.  All behavior lives in app.ts; this file only
// moves values between form fields and the app, and renders state.

import { FlareApi } from "./api.js";
import { FlutterApp } from "./app.js";
import { APP_NAME, DEV_KEY, SERVER_URL } from "./config.js";
import { composeEnabled, UiState } from "./state.js";

const app = new FlutterApp(new FlareApi(SERVER_URL, DEV_KEY));

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function render(state: UiState): void {
  el("login-screen").hidden = state.screen !== "login";
  el("timeline-screen").hidden = state.screen !== "timeline";
  el("other-screen").hidden = state.screen !== "other_user";
  el("status").textContent = state.statusMessage ?? "";

  if (state.screen === "timeline") {
    el("whoami").textContent = state.session?.username ?? "";
  }
  if (state.screen === "other_user") {
    el("other-title").textContent = `public posts by ${state.otherUsername}`;
  }

  const list = el<HTMLUListElement>(state.screen === "other_user" ? "other-posts" : "posts");
  list.replaceChildren(
    ...state.posts.map((row) => {
      const item = document.createElement("li");
      item.textContent = `[${row.when}] ${row.text}`;
      return item;
    }),
  );
}

function busy<A extends unknown[]>(fn: (...args: A) => Promise<UiState>) {
  // At most one in-flight request per screen action.
  let inFlight = false;
  return async (...args: A) => {
    if (inFlight) return;
    inFlight = true;
    try {
      render(await fn(...args));
    } catch (error) {
      el("status").textContent = `server error: ${error}`;
    } finally {
      inFlight = false;
    }
  };
}

const doLogin = busy(() =>
  app.login(el<HTMLInputElement>("username").value, el<HTMLInputElement>("password").value),
);
const doCompose = busy(async () => {
  const field = el<HTMLInputElement>("post-text");
  const state = await app.compose(field.value);
  field.value = "";
  return state;
});
const doView = busy(() => app.viewOther(el<HTMLInputElement>("other-username").value));

el("login-form").addEventListener("submit", (event) => {
  event.preventDefault();
  doLogin();
});
el("compose-form").addEventListener("submit", (event) => {
  event.preventDefault();
  if (composeEnabled(el<HTMLInputElement>("post-text").value)) doCompose();
});
el("view-form").addEventListener("submit", (event) => {
  event.preventDefault();
  doView();
});
el<HTMLInputElement>("post-text").addEventListener("input", () => {
  el<HTMLButtonElement>("post-submit").disabled = !composeEnabled(
    el<HTMLInputElement>("post-text").value,
  );
});
el("logout").addEventListener("click", () => render(app.logout()));
el("back").addEventListener("click", () =>
  render(app.state.session ? { ...app.state, screen: "timeline" } : app.logout()),
);

app
  .start(APP_NAME)
  .then(() => render(app.state))
  .catch((error) => {
    el("status").textContent = `cannot reach server: ${error}`;
  });
