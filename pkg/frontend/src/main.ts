// Browser entry point: read ?api=&session=&worker= and mount the app.

import { configFromLocation, mountApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const config = configFromLocation(window.location);
  if (config) {
    mountApp(root, config);
  } else {
    root.innerHTML = `
      <form class="setup" onsubmit="return false">
        <h2>join a labeling session</h2>
        <label>service URL <input name="api" placeholder="http://127.0.0.1:8080"></label>
        <label>session id <input name="session" required></label>
        <label>your worker name <input name="worker" required></label>
        <button data-action="go">start</button>
      </form>`;
    root.querySelector("[data-action=go]")?.addEventListener("click", () => {
      const value = (name: string) =>
        (root.querySelector(`input[name=${name}]`) as HTMLInputElement).value.trim();
      const params = new URLSearchParams({
        api: value("api"),
        session: value("session"),
        worker: value("worker"),
      });
      window.location.search = params.toString();
    });
  }
}
