/**
 * Bootstrap: read connection settings from query parameters and mount the
 * configurator.
 *
 *   index.html?api=http://127.0.0.1:8000/api/v1&model=m1&user=me&profile=ua
 */

import { ApiClient } from './api.js';
import { ConfiguratorApp } from './app.js';

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get('api') ?? 'http://127.0.0.1:8000/api/v1');
const root = document.getElementById('app');
if (root === null) {
    throw new Error('missing #app mount point');
}
const app = new ConfiguratorApp(api, root, {
    modelId: params.get('model') ?? 'm1',
    userId: params.get('user') ?? 'browser',
    profile: params.get('profile') ?? 'ua',
});
void app.start();
