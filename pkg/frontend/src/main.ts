import { App } from "./app.js";

const root = document.querySelector<HTMLElement>("#app");
if (root) {
  new App(root).start();
}
