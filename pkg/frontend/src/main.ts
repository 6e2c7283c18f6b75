/** Browser entry point: mounts the app against the hosting service. */

import { HttpApi } from "./api.js";
import { App } from "./app.js";

const rootEl = document.getElementById("app");
if (rootEl) {
  const app = new App(rootEl, new HttpApi(""));
  void app.init();
}
